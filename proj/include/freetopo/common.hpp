#ifndef FREETOPO_COMMON_HPP
#define FREETOPO_COMMON_HPP

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace freetopo {

using AsNum = std::uint32_t;

// Business relationship of an AS edge. ProviderCustomer edges carry an
// orientation (who the provider is) next to the label, see topology.hpp.
enum class Relationship { ProviderCustomer, PeerPeer, Unknown };

const char* relationship_name(Relationship r);

// Fatal input problem. Always carries file and line so batch runs can point
// at the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

struct Diagnostic {
  std::string file;
  int line = 0;  // 0 when not tied to a line
  std::string message;
};

// Collects non-fatal warnings. Warnings never change exit codes.
class Diagnostics {
 public:
  void warn(std::string file, int line, std::string message) {
    warnings_.push_back({std::move(file), line, std::move(message)});
  }
  void warn(std::string message) { warnings_.push_back({"", 0, std::move(message)}); }

  const std::vector<Diagnostic>& warnings() const { return warnings_; }
  bool empty() const { return warnings_.empty(); }

 private:
  std::vector<Diagnostic> warnings_;
};

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::optional<std::uint32_t> parse_u32(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Fixed formatting used for every numeric artifact so reruns are
// byte-identical. Integral values print without a fractional part.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace freetopo

#endif  // FREETOPO_COMMON_HPP
