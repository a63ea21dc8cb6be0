#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace wignerlab {

// %.17g; round-trips every double.
std::string formatDouble(double value);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string readFile(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over the target, so readers see
// either the old or the new contents.
void writeFileAtomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace wignerlab
