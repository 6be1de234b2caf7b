#pragma once

#include <string>
#include <string_view>

namespace entroheat {

std::string base64_encode(std::string_view bytes);
/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace entroheat
