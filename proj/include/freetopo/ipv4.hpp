#ifndef FREETOPO_IPV4_HPP
#define FREETOPO_IPV4_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "freetopo/common.hpp"

namespace freetopo {

std::optional<std::uint32_t> parse_ipv4(std::string_view s);
std::string ipv4_to_string(std::uint32_t ip);

// Addresses that never identify a public AS hop: RFC 1918, loopback,
// link-local, CGN, documentation, multicast, class E and friends.
bool is_private_or_reserved(std::uint32_t ip);

struct Ipv4Prefix {
  std::uint32_t addr = 0;  // host order, masked to length
  int len = 0;             // 0..32

  static std::optional<Ipv4Prefix> parse(std::string_view s);
  static std::optional<Ipv4Prefix> from_parts(std::uint32_t addr, int len);

  bool contains(std::uint32_t ip) const;
  std::uint64_t address_count() const { return std::uint64_t{1} << (32 - len); }
  std::string to_string() const;

  friend bool operator==(const Ipv4Prefix&, const Ipv4Prefix&) = default;
  friend auto operator<=>(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

struct PrefixOrigin {
  Ipv4Prefix prefix;
  std::vector<AsNum> origins;  // sorted, unique, non-empty
};

// Longest-prefix-match table over a binary trie. Exact duplicate prefixes
// merge their origin sets on insert.
class PrefixTable {
 public:
  void insert(const Ipv4Prefix& prefix, const std::vector<AsNum>& origins);

  // Deepest entry containing ip, or nullptr.
  const PrefixOrigin* lookup(std::uint32_t ip) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  static PrefixTable build(const std::vector<PrefixOrigin>& records);

 private:
  struct Node {
    int child[2] = {-1, -1};
    int entry = -1;
  };
  std::vector<Node> nodes_{Node{}};
  std::vector<PrefixOrigin> entries_;
};

// Set of IXP fabric prefixes; membership only.
class IxpPrefixes {
 public:
  void insert(const Ipv4Prefix& prefix);
  bool contains(std::uint32_t ip) const { return table_.lookup(ip) != nullptr; }
  const std::vector<Ipv4Prefix>& prefixes() const { return prefixes_; }

 private:
  PrefixTable table_;
  std::vector<Ipv4Prefix> prefixes_;
};

}  // namespace freetopo

#endif  // FREETOPO_IPV4_HPP
