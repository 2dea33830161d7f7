#ifndef FREETOPO_INGEST_HPP
#define FREETOPO_INGEST_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "freetopo/common.hpp"
#include "freetopo/ipv4.hpp"

namespace freetopo {

// One AS relationship line. For ProviderCustomer, as_a is the provider of
// as_b. PeerPeer records are unordered.
struct RelRecord {
  AsNum as_a = 0;
  AsNum as_b = 0;
  Relationship rel = Relationship::Unknown;

  friend bool operator==(const RelRecord&, const RelRecord&) = default;
};

struct CountryAssignment {
  AsNum asn = 0;
  std::string country;  // ISO 3166-1 alpha-2, upper case
};

struct CountryRecord {
  std::string country;
  double fpi = 0;  // 0 (most free) .. 100 (least free)
  std::uint64_t population = 0;
};

// Relationship file, serial-1 style lines `asA|asB|code`, code -1 = asA
// provider of asB, code 0 = peers. `#` comments and blank lines skipped.
// A pair appearing twice with conflicting labels is a fatal error.
std::vector<RelRecord> parse_rel_file(const std::string& path, Diagnostics& diag);

// Inverse of parse_rel_file; reparsing the output yields the same records.
void write_rel_records(std::ostream& out, std::span<const RelRecord> records);

// RIR extended delegation format. Only `asn` rows with status
// allocated/assigned are used; `start,count` runs expand to per-ASN
// assignments. Duplicate ASNs resolve first-wins with a warning.
std::vector<CountryAssignment> parse_delegations(const std::string& path, Diagnostics& diag);

// Lines `prefix<TAB>length<TAB>asn`; asn may be a multi-origin set joined
// by `_` or `,`.
std::vector<PrefixOrigin> parse_prefix2as(const std::string& path, Diagnostics& diag);

// One IXP prefix per line.
IxpPrefixes parse_ixp_prefixes(const std::string& path, Diagnostics& diag);

// Merged per-country table `country,fpi,population` with a header line.
std::vector<CountryRecord> parse_country_table(const std::string& path, Diagnostics& diag);

}  // namespace freetopo

#endif  // FREETOPO_INGEST_HPP
