#pragma once

#include <string>

#include "ose/ddss.hpp"

namespace ose::tools {

/// Serves `POST /events/<class>` and `GET /diagnostics/<class>?since=<t>`
/// until the process is stopped. Each accepted event is stepped through the
/// engine before the response is sent.
void serve(ddss::Ddss& service, const std::string& host, int port);

}  // namespace ose::tools
