#include "freetopo/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace freetopo {

namespace {

// Applies fn(line_number, line) to every line, universal newlines.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(lineno, std::string_view(line));
  }
}

bool is_comment_or_blank(std::string_view line) {
  auto t = trim(line);
  return t.empty() || t.front() == '#';
}

bool valid_country_code(std::string_view cc) {
  return cc.size() == 2 && std::isalpha(static_cast<unsigned char>(cc[0])) &&
         std::isalpha(static_cast<unsigned char>(cc[1]));
}

std::string upper2(std::string_view cc) {
  std::string out(cc);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<RelRecord> parse_rel_file(const std::string& path, Diagnostics& diag) {
  (void)diag;
  std::vector<RelRecord> records;
  // unordered pair -> (provider-or-0 for p2p, line first seen)
  std::map<std::pair<AsNum, AsNum>, std::pair<AsNum, int>> seen;

  for_each_line(path, [&](int lineno, std::string_view line) {
    if (is_comment_or_blank(line)) return;
    auto fields = split(trim(line), '|');
    if (fields.size() < 3) throw ParseError(path, lineno, "expected asA|asB|code");
    auto a = parse_u32(fields[0]);
    auto b = parse_u32(fields[1]);
    auto code = trim(fields[2]);
    if (!a || !b) throw ParseError(path, lineno, "bad AS number");
    if (*a == *b) throw ParseError(path, lineno, "self-loop relationship");

    RelRecord rec;
    rec.as_a = *a;
    rec.as_b = *b;
    if (code == "-1") {
      rec.rel = Relationship::ProviderCustomer;
    } else if (code == "0") {
      rec.rel = Relationship::PeerPeer;
    } else {
      throw ParseError(path, lineno, "unknown relationship code '" + std::string(code) + "'");
    }

    std::pair<AsNum, AsNum> key{std::min(*a, *b), std::max(*a, *b)};
    AsNum provider = rec.rel == Relationship::ProviderCustomer ? rec.as_a : 0;
    auto [it, inserted] = seen.emplace(key, std::make_pair(provider, lineno));
    if (!inserted && it->second.first != provider) {
      throw ParseError(path, lineno,
                       "conflicting relationship for pair " + std::to_string(key.first) + "-" +
                           std::to_string(key.second) + " (first seen at line " +
                           std::to_string(it->second.second) + ")");
    }
    records.push_back(rec);
  });
  return records;
}

void write_rel_records(std::ostream& out, std::span<const RelRecord> records) {
  for (const auto& r : records) {
    out << r.as_a << '|' << r.as_b << '|'
        << (r.rel == Relationship::ProviderCustomer ? "-1" : "0") << '\n';
  }
}

std::vector<CountryAssignment> parse_delegations(const std::string& path, Diagnostics& diag) {
  std::vector<CountryAssignment> out;
  std::map<AsNum, std::pair<std::string, int>> first;  // asn -> (country, line)

  for_each_line(path, [&](int lineno, std::string_view line) {
    if (is_comment_or_blank(line)) return;
    auto fields = split(trim(line), '|');
    // version headers and summary lines are structural, not records
    if (fields.size() >= 6 && trim(fields[5]) == "summary") return;
    if (lineno == 1 && !fields.empty() && parse_u32(fields[0]).has_value()) return;
    if (fields.size() < 7) throw ParseError(path, lineno, "expected registry|cc|type|start|count|date|status");

    if (trim(fields[2]) != "asn") return;
    auto status = trim(fields[6]);
    if (status != "allocated" && status != "assigned") {
      diag.warn(path, lineno, "skipping asn record with status '" + std::string(status) + "'");
      return;
    }
    auto cc = trim(fields[1]);
    if (!valid_country_code(cc)) throw ParseError(path, lineno, "bad country code '" + std::string(cc) + "'");
    auto start = parse_u32(fields[3]);
    auto count = parse_u32(fields[4]);
    if (!start || !count || *count == 0) throw ParseError(path, lineno, "bad asn start/count");

    std::string country = upper2(cc);
    for (std::uint32_t i = 0; i < *count; ++i) {
      AsNum asn = *start + i;
      auto [it, inserted] = first.emplace(asn, std::make_pair(country, lineno));
      if (!inserted) {
        if (it->second.first != country) {
          diag.warn(path, lineno,
                    "AS" + std::to_string(asn) + " already assigned to " + it->second.first +
                        " at line " + std::to_string(it->second.second) + "; keeping first");
        }
        continue;
      }
      out.push_back({asn, country});
    }
  });
  return out;
}

std::vector<PrefixOrigin> parse_prefix2as(const std::string& path, Diagnostics& diag) {
  (void)diag;
  std::vector<PrefixOrigin> out;
  for_each_line(path, [&](int lineno, std::string_view line) {
    if (is_comment_or_blank(line)) return;
    auto fields = split(line, '\t');
    if (fields.size() < 3) throw ParseError(path, lineno, "expected prefix<TAB>length<TAB>asn");
    auto addr = parse_ipv4(fields[0]);
    auto len = parse_u32(fields[1]);
    if (!addr || !len || *len > 32) throw ParseError(path, lineno, "invalid prefix");
    auto prefix = Ipv4Prefix::from_parts(*addr, static_cast<int>(*len));
    if (!prefix) throw ParseError(path, lineno, "invalid prefix");

    PrefixOrigin rec;
    rec.prefix = *prefix;
    std::string asns(trim(fields[2]));
    std::replace(asns.begin(), asns.end(), ',', '_');
    for (auto part : split(asns, '_')) {
      auto asn = parse_u32(part);
      if (!asn) throw ParseError(path, lineno, "bad origin ASN '" + std::string(part) + "'");
      rec.origins.push_back(*asn);
    }
    std::sort(rec.origins.begin(), rec.origins.end());
    rec.origins.erase(std::unique(rec.origins.begin(), rec.origins.end()), rec.origins.end());
    if (rec.origins.empty()) throw ParseError(path, lineno, "empty origin set");
    out.push_back(std::move(rec));
  });
  return out;
}

IxpPrefixes parse_ixp_prefixes(const std::string& path, Diagnostics& diag) {
  (void)diag;
  IxpPrefixes out;
  for_each_line(path, [&](int lineno, std::string_view line) {
    if (is_comment_or_blank(line)) return;
    auto prefix = Ipv4Prefix::parse(trim(line));
    if (!prefix) throw ParseError(path, lineno, "invalid prefix '" + std::string(trim(line)) + "'");
    out.insert(*prefix);
  });
  return out;
}

std::vector<CountryRecord> parse_country_table(const std::string& path, Diagnostics& diag) {
  std::vector<CountryRecord> out;
  std::map<std::string, int> seen;
  bool header_skipped = false;

  for_each_line(path, [&](int lineno, std::string_view line) {
    if (is_comment_or_blank(line)) return;
    if (!header_skipped) {
      header_skipped = true;
      return;
    }
    auto fields = split(trim(line), ',');
    if (fields.size() < 3) throw ParseError(path, lineno, "expected country,fpi,population");
    auto cc = trim(fields[0]);
    if (!valid_country_code(cc)) throw ParseError(path, lineno, "bad country code '" + std::string(cc) + "'");
    auto fpi = parse_double(fields[1]);
    auto population = parse_u64(fields[2]);
    if (!fpi) throw ParseError(path, lineno, "bad fpi value");
    if (*fpi < 0 || *fpi > 100) throw ParseError(path, lineno, "fpi outside [0,100]");
    if (!population || *population == 0) throw ParseError(path, lineno, "population must be positive");

    std::string country = upper2(cc);
    auto [it, inserted] = seen.emplace(country, lineno);
    if (!inserted) {
      diag.warn(path, lineno, "duplicate country " + country + " (first seen at line " +
                                  std::to_string(it->second) + "); keeping first");
      return;
    }
    out.push_back({country, *fpi, *population});
  });
  return out;
}

}  // namespace freetopo
