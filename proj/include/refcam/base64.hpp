#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refcam {

/// Standard alphabet, '=' padded.
std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Strict decoder: rejects bad characters, bad padding and wrong lengths (InputError).
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace refcam
