#include "serve.hpp"

#include <httplib.h>

#include <iostream>
#include <limits>
#include <json.hpp>

#include "ose/error.hpp"
#include "ose/text.hpp"

namespace ose::tools {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownEventClass: return 404;
    case ErrorCode::NonMonotoneTimestamp: return 409;
    default: return 400;
  }
}

void send_error(httplib::Response& res, const Error& e) {
  res.status = status_for(e.code());
  const nlohmann::json body{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  res.set_content(body.dump(), "application/json");
}

}  // namespace

void serve(ddss::Ddss& service, const std::string& host, int port) {
  httplib::Server server;

  server.Post(R"(/events/([A-Za-z0-9_\-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      ddss::WireEvent e = ddss::parse_wire_event(req.body);
      const std::string cls = req.matches[1];
      if (e.event_class.empty()) e.event_class = cls;
      if (e.event_class != cls) {
        throw Error(ErrorCode::MalformedEvent, "body class " + e.event_class + " does not match path " + cls);
      }
      const ddss::EventRecord stored = service.ingest_event(e);
      const auto emitted = service.step_engine();
      nlohmann::json body = nlohmann::json::parse(ddss::to_json(stored));
      body["emitted"] = nlohmann::json::parse(ddss::to_json(emitted));
      res.status = 201;
      res.set_content(body.dump(), "application/json");
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  server.Get(R"(/diagnostics/([A-Za-z0-9_\-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      std::int64_t since = std::numeric_limits<std::int64_t>::min();
      if (req.has_param("since")) since = text::parse_iso8601(req.get_param_value("since"));
      res.set_content(ddss::to_json(service.diagnostics(req.matches[1].str(), since)), "application/json");
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  server.Get("/manifest", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(service.bundle().manifest(), "application/json");
  });

  std::cerr << "serving on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace ose::tools
