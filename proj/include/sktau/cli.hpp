#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sktau/schottky.hpp"

namespace sktau::cli {

using json = nlohmann::ordered_json;

// literal a+bi, no spaces: "0.1+0.9i", "-2i", "1.5", "1e-3-2e-2i"
cplx parse_complex(const std::string& s);
std::string format_complex(cplx z);

// GroupFile: {"genus", "generators": [[[re,im] x4] ...], "circles"?, "normalize"}
MarkedSchottkyGroup parse_group(const json& doc);
MarkedSchottkyGroup parse_group_text(const std::string& text);
MarkedSchottkyGroup parse_group_file(const std::string& path);

// Runs one subcommand (args exclude the program name). The report goes to
// `out` (or --out), errors to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sktau::cli
