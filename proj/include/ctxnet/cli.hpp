#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctxnet::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;  // usage or validation error
inline constexpr int kIo = 2;
inline constexpr int kCorrectness = 3;

// Entry point of the `ctxnet` tool. args[0] is the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "2", "0.333" or a fraction such as "1/3". Throws ConfigError.
double parse_frequency(const std::string& text);
// "1..5", "3" or "1,3,5". Throws ConfigError.
std::vector<std::size_t> parse_model_range(const std::string& text);

}  // namespace ctxnet::cli
