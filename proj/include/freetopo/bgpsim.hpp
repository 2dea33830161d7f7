#ifndef FREETOPO_BGPSIM_HPP
#define FREETOPO_BGPSIM_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "freetopo/topology.hpp"

namespace freetopo {

// Customer cones: per AS, the set of ASes reachable over provider->customer
// edges, self included. Provider-customer cycles collapse to strongly
// connected components first, so every member of an SCC shares one cone.
class CustomerCones {
 public:
  // Sorted cone members, self included. ASNs absent at computation time act
  // as stubs: empty member view, cone size 1.
  std::span<const AsNum> cone(AsNum asn) const;
  std::size_t cone_size(AsNum asn) const;

 private:
  friend CustomerCones customer_cones(const AsGraph& g);
  std::unordered_map<AsNum, std::shared_ptr<const std::vector<AsNum>>> by_asn_;
};

CustomerCones customer_cones(const AsGraph& g);

// Descending customer-cone size; ties broken by descending degree, then
// ascending ASN.
std::vector<AsNum> as_rank(const AsGraph& g, const CustomerCones& cones);

inline constexpr std::int32_t kUnreachable = -1;

// Minimum hop count over valley-free paths from a source set. A path is
// valid iff its letter word matches up* peer? down*; Unknown-label edges are
// not traversable. Breadth-first search over the 3-state product graph.
class PolicyDistance {
 public:
  std::int32_t distance(AsNum asn) const;  // kUnreachable when no valid path

 private:
  friend PolicyDistance valley_free_distances(const AsGraph& g,
                                              std::span<const AsNum> sources);
  const AsGraph* graph_ = nullptr;
  std::vector<std::int32_t> dist_;  // by dense node index
};

PolicyDistance valley_free_distances(const AsGraph& g, std::span<const AsNum> sources);

// Country-to-country minimum policy distances: entry(a, b) is the minimum
// valley-free distance over all pairs of a's and b's domestic nodes. One
// multi-source run per source country.
class CountryMatrix {
 public:
  const std::vector<std::string>& countries() const { return countries_; }
  std::int32_t entry(const std::string& src, const std::string& dst) const;
  std::span<const std::int32_t> row(const std::string& src) const;

  // Largest finite distance anywhere in the matrix; 0 when none.
  std::int32_t max_finite() const;

  void save(std::ostream& out) const;  // `src,dst,distance|UNREACHABLE`

 private:
  friend CountryMatrix country_path_matrix(const AsGraph& g,
                                           std::span<const std::string> countries);
  std::vector<std::string> countries_;  // sorted
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::int32_t>> dist_;
};

CountryMatrix country_path_matrix(const AsGraph& g, std::span<const std::string> countries);

}  // namespace freetopo

#endif  // FREETOPO_BGPSIM_HPP
