#include "xmb/error.hpp"

namespace xmb {

void throw_config(const std::string& msg) { throw ConfigError(msg); }
void throw_data(const std::string& msg) { throw DataError(msg); }

}  // namespace xmb
