#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kpqg/error.hpp"
#include "kpqg/importance.hpp"
#include "kpqg/maskfill.hpp"
#include "kpqg/scheduler.hpp"

namespace kpqg {

enum class DecodeMode { Insertion, Autoregressive };

struct GenerateRequest {
  std::string context;
  std::string answer;
  std::vector<std::string> keywords;  // ordered phrases
  DecodeMode mode = DecodeMode::Insertion;
  DecodeLimits limits;
  std::string filler;  // registered backend name; empty selects the default
};

/// Parses and validates a /api/generate body. Throws InvalidArgument.
GenerateRequest parse_generate_request(const std::string& body);

/// Runs a validated request and returns the response JSON
/// {"question", "trace": [{"input", "mask_positions", "predictions"}], "truncated"}.
std::string run_generate(const GenerateRequest& request, const MaskFiller& filler);

std::string trace_json(const GenerationResult& result);

struct Backends {
  std::map<std::string, std::shared_ptr<const MaskFiller>> fillers;
  std::string default_filler;
  std::shared_ptr<const AnswerScorer> scorer;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Transport-independent request handlers. All methods are const and share
/// only immutable backends, so concurrent calls never interleave state.
class Gateway {
 public:
  explicit Gateway(Backends backends);

  HttpReply generate(const std::string& body) const;
  HttpReply importance(const std::string& body) const;
  HttpReply instances(const std::string& body) const;
  HttpReply health() const;

 private:
  Backends backends_;
};

int http_status_for(ErrorCode code);

/// HTTP front end for a Gateway (cpp-httplib).
class Service {
 public:
  explicit Service(std::shared_ptr<const Gateway> gateway);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kpqg
