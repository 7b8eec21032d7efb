#pragma once

#include <string>
#include <vector>

namespace maxlab {

// Write-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

std::string csv_line(const std::vector<std::string>& fields);
std::string format_double(double v); // shortest round-trip form

} // namespace maxlab
