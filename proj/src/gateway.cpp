#include "kpqg/gateway.hpp"

#include <httplib.h>
#include <json.hpp>

#include "kpqg/error.hpp"
#include "kpqg/instances.hpp"

namespace kpqg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_body(const std::string& body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid JSON: ") + e.what());
  }
}

std::string required_string(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + field + "' must be a string");
  }
  return j[field].get<std::string>();
}

std::size_t positive_int(const json& j, const char* field, std::size_t fallback) {
  if (!j.contains(field)) return fallback;
  const auto& v = j[field];
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + field + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

TokenSeq non_empty_tokens(const std::string& text, const char* field) {
  auto toks = tokenize(text);
  if (toks.empty()) throw Error(ErrorCode::InvalidArgument, std::string("field '") + field + "' is empty");
  return toks;
}

HttpReply error_reply(const Error& e) {
  ordered_json j;
  j["error"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  return {http_status_for(e.code()), j.dump()};
}

template <typename Fn>
HttpReply guarded(Fn&& fn) {
  try {
    return {200, fn()};
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const std::exception& e) {
    return error_reply(Error(ErrorCode::InvalidArgument, e.what()));
  }
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyQuestion:
    case ErrorCode::RankingMismatch:
    case ErrorCode::UnfinishedSequence:
    case ErrorCode::MalformedLine:
      return 400;
    case ErrorCode::RemoteUnavailable:
    case ErrorCode::ScorerFailure:
    case ErrorCode::ScriptExhausted:
    case ErrorCode::ScheduleMismatch:
    case ErrorCode::LengthMismatch:
      return 502;
    default:
      return 500;
  }
}

GenerateRequest parse_generate_request(const std::string& body) {
  auto j = parse_body(body);
  GenerateRequest req;
  req.context = required_string(j, "context");
  req.answer = required_string(j, "answer");
  non_empty_tokens(req.context, "context");
  non_empty_tokens(req.answer, "answer");
  if (j.contains("keywords")) {
    if (!j["keywords"].is_array()) throw Error(ErrorCode::InvalidArgument, "field 'keywords' must be an array");
    for (const auto& k : j["keywords"]) {
      if (!k.is_string()) throw Error(ErrorCode::InvalidArgument, "keywords must be strings");
      non_empty_tokens(k.get<std::string>(), "keywords[]");
      req.keywords.push_back(k.get<std::string>());
    }
  }
  auto mode = j.value("mode", std::string("insertion"));
  if (mode == "insertion") {
    req.mode = DecodeMode::Insertion;
  } else if (mode == "autoregressive") {
    req.mode = DecodeMode::Autoregressive;
  } else {
    throw Error(ErrorCode::InvalidArgument, "mode must be 'insertion' or 'autoregressive'");
  }
  if (req.mode == DecodeMode::Autoregressive && !req.keywords.empty()) {
    throw Error(ErrorCode::InvalidArgument, "autoregressive mode does not take keywords");
  }
  req.limits.max_new_tokens = positive_int(j, "max_new_tokens", req.limits.max_new_tokens);
  req.limits.max_iterations = positive_int(j, "max_iterations", req.limits.max_iterations);
  if (j.contains("filler")) {
    if (!j["filler"].is_string()) throw Error(ErrorCode::InvalidArgument, "field 'filler' must be a string");
    req.filler = j["filler"].get<std::string>();
  }
  return req;
}

std::string trace_json(const GenerationResult& result) {
  ordered_json j;
  j["question"] = render(result.question);
  j["trace"] = json::array();
  for (const auto& step : result.trace) {
    ordered_json s;
    s["input"] = texts(step.input);
    s["mask_positions"] = step.mask_positions;
    s["predictions"] = texts(step.predictions);
    j["trace"].push_back(std::move(s));
  }
  j["truncated"] = result.truncated;
  return j.dump();
}

std::string run_generate(const GenerateRequest& request, const MaskFiller& filler) {
  auto context = tokenize(request.context);
  auto answer = tokenize(request.answer);
  if (request.mode == DecodeMode::Autoregressive) {
    return trace_json(decode_autoregressive(context, answer, filler, request.limits));
  }
  std::vector<TokenSeq> keywords;
  for (const auto& k : request.keywords) keywords.push_back(tokenize(k));
  return trace_json(decode(context, answer, keywords, filler, request.limits));
}

Gateway::Gateway(Backends backends) : backends_(std::move(backends)) {}

HttpReply Gateway::generate(const std::string& body) const {
  return guarded([&] {
    auto req = parse_generate_request(body);
    auto name = req.filler.empty() ? backends_.default_filler : req.filler;
    auto it = backends_.fillers.find(name);
    if (it == backends_.fillers.end()) throw Error(ErrorCode::InvalidArgument, "filler '" + name + "' is not configured");
    return run_generate(req, *it->second);
  });
}

HttpReply Gateway::importance(const std::string& body) const {
  return guarded([&] {
    auto j = parse_body(body);
    auto context = tokenize(required_string(j, "context"));
    auto answer = tokenize(required_string(j, "answer"));
    auto question = tokenize(required_string(j, "question"));
    if (question.empty()) throw Error(ErrorCode::EmptyQuestion, "question is empty");
    if (!backends_.scorer) throw Error(ErrorCode::ScorerFailure, "no scorer configured");
    auto ranking = rank_importance(context, answer, question, *backends_.scorer);
    ordered_json out;
    out["tokens"] = texts(question);
    out["order"] = ranking.order;
    out["confidences"] = ranking.confidences;
    return out.dump();
  });
}

HttpReply Gateway::instances(const std::string& body) const {
  return guarded([&] {
    auto j = parse_body(body);
    auto context = tokenize(required_string(j, "context"));
    auto answer = tokenize(required_string(j, "answer"));
    auto question = tokenize(required_string(j, "question"));
    if (question.empty()) throw Error(ErrorCode::EmptyQuestion, "question is empty");
    std::vector<std::size_t> order;
    if (j.contains("order")) {
      try {
        order = j["order"].get<std::vector<std::size_t>>();
      } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidArgument, "field 'order' must be an array of indices");
      }
    } else {
      if (!backends_.scorer) throw Error(ErrorCode::ScorerFailure, "no scorer configured");
      order = rank_importance(context, answer, question, *backends_.scorer).order;
    }
    auto built = build_instances(context, answer, question, order);
    ordered_json out;
    out["order"] = order;
    out["instances"] = json::array();
    for (const auto& inst : built) {
      ordered_json i;
      i["input"] = texts(inst.input);
      i["labels"] = texts(inst.labels);
      out["instances"].push_back(std::move(i));
    }
    return out.dump();
  });
}

HttpReply Gateway::health() const {
  ordered_json j;
  j["status"] = "ok";
  j["filler"] = backends_.default_filler;
  return {200, j.dump()};
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  std::shared_ptr<const Gateway> gateway;
  httplib::Server server;
};

Service::Service(std::shared_ptr<const Gateway> gateway) : impl_(std::make_unique<Impl>()) {
  impl_->gateway = std::move(gateway);
  auto& srv = impl_->server;
  const Gateway* gw = impl_->gateway.get();
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json; charset=utf-8");
  };
  srv.Post("/api/generate", [gw, send](const httplib::Request& req, httplib::Response& res) {
    send(res, gw->generate(req.body));
  });
  srv.Post("/api/importance", [gw, send](const httplib::Request& req, httplib::Response& res) {
    send(res, gw->importance(req.body));
  });
  srv.Post("/api/instances", [gw, send](const httplib::Request& req, httplib::Response& res) {
    send(res, gw->instances(req.body));
  });
  srv.Get("/api/health", [gw, send](const httplib::Request&, httplib::Response& res) { send(res, gw->health()); });
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace kpqg
