#include "freetopo/traceroute.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>

#include "json.hpp"

namespace freetopo {

namespace {

using nlohmann::json;

bool valid_country_code(const std::string& cc) {
  return cc.size() == 2 && std::isalpha(static_cast<unsigned char>(cc[0])) &&
         std::isalpha(static_cast<unsigned char>(cc[1]));
}

// One hop entry: {"idx": n, "ip": "a.b.c.d" | null} or
// {"idx": n, "replies": ["a.b.c.d" | null, ...]} (first response wins).
std::optional<Hop> parse_hop(const json& j, std::string* error) {
  if (!j.is_object() || !j.contains("idx") || !j["idx"].is_number_integer()) {
    *error = "hop without integer idx";
    return std::nullopt;
  }
  Hop hop;
  hop.idx = j["idx"].get<int>();

  const json* addr = nullptr;
  if (j.contains("replies")) {
    if (!j["replies"].is_array()) {
      *error = "replies is not an array";
      return std::nullopt;
    }
    for (const auto& r : j["replies"]) {
      if (!r.is_null()) {
        addr = &r;
        break;
      }
    }
  } else if (j.contains("ip") && !j["ip"].is_null()) {
    addr = &j["ip"];
  }

  if (addr) {
    if (!addr->is_string()) {
      *error = "hop address is not a string";
      return std::nullopt;
    }
    auto ip = parse_ipv4(addr->get<std::string>());
    if (!ip) {
      *error = "bad IPv4 address '" + addr->get<std::string>() + "'";
      return std::nullopt;
    }
    hop.ip = *ip;
  }
  return hop;
}

std::optional<TracerouteRecord> parse_record(const json& j, std::string* error) {
  if (!j.is_object()) {
    *error = "record is not an object";
    return std::nullopt;
  }
  TracerouteRecord rec;

  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
    *error = "missing id";
    return std::nullopt;
  }
  rec.id = j["id"].get<std::string>();

  if (!j.contains("kind") || !j["kind"].is_string()) {
    *error = "missing kind";
    return std::nullopt;
  }
  auto kind = trace_kind_from_name(j["kind"].get<std::string>());
  if (!kind) {
    *error = "unknown kind '" + j["kind"].get<std::string>() + "'";
    return std::nullopt;
  }
  rec.kind = *kind;

  for (const char* field : {"src_country", "dst_country"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      *error = std::string("missing ") + field;
      return std::nullopt;
    }
    std::string cc = j[field].get<std::string>();
    for (char& c : cc) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!valid_country_code(cc)) {
      *error = std::string("bad ") + field + " '" + cc + "'";
      return std::nullopt;
    }
    (field[0] == 's' ? rec.src_country : rec.dst_country) = cc;
  }

  if (j.contains("batch")) {
    if (!j["batch"].is_number_integer() || j["batch"].get<int>() < 0) {
      *error = "batch must be a non-negative integer";
      return std::nullopt;
    }
    rec.batch = j["batch"].get<int>();
  }

  if (!j.contains("hops") || !j["hops"].is_array()) {
    *error = "missing hops array";
    return std::nullopt;
  }
  for (const auto& h : j["hops"]) {
    auto hop = parse_hop(h, error);
    if (!hop) return std::nullopt;
    if (!rec.hops.empty() && hop->idx <= rec.hops.back().idx) {
      *error = "hop indices not strictly increasing";
      return std::nullopt;
    }
    rec.hops.push_back(*hop);
  }
  if (rec.hops.size() < 2) {
    *error = "fewer than 2 hops";
    return std::nullopt;
  }
  return rec;
}

// Deterministic finite control for the grammar up* peer? down*: state 0
// before any peer/down letter, state 1 right after the peer, state 2 once
// descending. Every state accepts.
constexpr int kAutomatonStates = 3;

int automaton_step(int state, StepLetter letter) {
  switch (state) {
    case 0:
      if (letter == StepLetter::Up) return 0;
      if (letter == StepLetter::Peer) return 1;
      return 2;
    case 1:
      return letter == StepLetter::Down ? 2 : -1;
    default:
      return letter == StepLetter::Down ? 2 : -1;
  }
}

constexpr std::array<StepLetter, 3> kLetters{StepLetter::Up, StepLetter::Peer, StepLetter::Down};

// Letter bitmask (1<<letter) usable for edge j of a segment walk.
std::uint8_t letter_options(const AsGraph& g, AsNum from, AsNum to) {
  const EdgeData* e = g.edge(from, to);
  if (!e || e->rel == Relationship::Unknown) return 0b111;
  auto letter = g.step_letter(from, to);
  return static_cast<std::uint8_t>(1u << static_cast<int>(*letter));
}

// Pair-oriented constraint bit for traveling `from`→`to` with `letter`.
std::uint8_t constraint_bit(AsNum from, AsNum to, StepLetter letter) {
  if (letter == StepLetter::Peer) return kAllowPeer;
  AsNum provider = letter == StepLetter::Up ? to : from;
  return provider == EdgeKey(from, to).lo ? kAllowLoProvider : kAllowHiProvider;
}

// Per-edge feasible letters over all valley-free words of the segment whose
// letter j lies in options[j]; empty letter sets mean the segment admits no
// valley-free labeling at all.
std::vector<std::uint8_t> feasible_letters(const std::vector<std::uint8_t>& options) {
  const int k = static_cast<int>(options.size());
  // forward[j] = states reachable after edges [0, j); backward[j] = states
  // from which edges [j, k) can complete.
  std::vector<std::array<bool, kAutomatonStates>> forward(k + 1, {false, false, false});
  std::vector<std::array<bool, kAutomatonStates>> backward(k + 1, {false, false, false});
  forward[0][0] = true;
  for (int j = 0; j < k; ++j)
    for (int s = 0; s < kAutomatonStates; ++s) {
      if (!forward[j][s]) continue;
      for (StepLetter l : kLetters) {
        if (!(options[j] & (1u << static_cast<int>(l)))) continue;
        int next = automaton_step(s, l);
        if (next >= 0) forward[j + 1][next] = true;
      }
    }
  backward[k] = {true, true, true};
  for (int j = k - 1; j >= 0; --j)
    for (int s = 0; s < kAutomatonStates; ++s)
      for (StepLetter l : kLetters) {
        if (!(options[j] & (1u << static_cast<int>(l)))) continue;
        int next = automaton_step(s, l);
        if (next >= 0 && backward[j + 1][next]) backward[j][s] = true;
      }

  std::vector<std::uint8_t> feasible(k, 0);
  for (int j = 0; j < k; ++j)
    for (int s = 0; s < kAutomatonStates; ++s) {
      if (!forward[j][s]) continue;
      for (StepLetter l : kLetters) {
        if (!(options[j] & (1u << static_cast<int>(l)))) continue;
        int next = automaton_step(s, l);
        if (next >= 0 && backward[j + 1][next])
          feasible[j] |= static_cast<std::uint8_t>(1u << static_cast<int>(l));
      }
    }
  return feasible;
}

}  // namespace

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::InsideOut: return "inside_out";
    case TraceKind::OutsideIn: return "outside_in";
    case TraceKind::Mesh: return "mesh";
  }
  return "mesh";
}

std::optional<TraceKind> trace_kind_from_name(std::string_view name) {
  if (name == "inside_out") return TraceKind::InsideOut;
  if (name == "outside_in") return TraceKind::OutsideIn;
  if (name == "mesh") return TraceKind::Mesh;
  return std::nullopt;
}

NormalizeResult normalize_traceroutes(const std::string& path, Diagnostics& diag) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  NormalizeResult result;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;

    std::string error;
    json j = json::parse(t, nullptr, false);
    if (j.is_discarded()) {
      error = "invalid record syntax";
    } else if (auto rec = parse_record(j, &error)) {
      result.records.push_back(std::move(*rec));
      continue;
    }
    ++result.skipped;
    diag.warn(path, lineno, "skipping traceroute: " + error);
  }
  return result;
}

std::optional<AsPathRecord> to_as_path(const TracerouteRecord& t,
                                       const PrefixTable& prefixes,
                                       const IxpPrefixes& ixp) {
  AsPathRecord out;
  out.source_id = t.id;
  out.kind = t.kind;
  out.batch = t.batch;

  bool pending_gap = false;
  for (const Hop& hop : t.hops) {
    if (!hop.ip) {
      pending_gap = true;
      continue;
    }
    if (ixp.contains(*hop.ip)) {
      ++out.dropped_ixp_hops;
      continue;
    }
    if (is_private_or_reserved(*hop.ip)) continue;

    const PrefixOrigin* entry = prefixes.lookup(*hop.ip);
    if (!entry || entry->origins.size() != 1) {
      pending_gap = true;
      continue;
    }
    AsNum asn = entry->origins[0];
    if (!out.as_path.empty() && out.as_path.back() == asn) {
      pending_gap = false;  // the losses sit inside one AS; nothing was crossed
      continue;
    }
    if (pending_gap) {
      out.gaps.push_back(static_cast<int>(out.as_path.size()));
      pending_gap = false;
    }
    out.as_path.push_back(asn);
  }
  if (pending_gap) out.gaps.push_back(static_cast<int>(out.as_path.size()));

  if (out.as_path.empty()) return std::nullopt;
  return out;
}

std::vector<EdgeKey> extract_edges(const AsPathRecord& p, const AsGraph& g) {
  std::vector<EdgeKey> out;
  for (std::size_t i = 1; i < p.as_path.size(); ++i) {
    if (std::find(p.gaps.begin(), p.gaps.end(), static_cast<int>(i)) != p.gaps.end()) continue;
    EdgeKey key(p.as_path[i - 1], p.as_path[i]);
    if (g.edge(key.lo, key.hi)) continue;
    out.push_back(key);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

InferenceResult infer_relationships(std::span<const AsPathRecord> paths, const AsGraph& g) {
  InferenceResult result;
  std::map<EdgeKey, std::uint8_t> intersection;

  for (const AsPathRecord& p : paths) {
    // Split into gap-free segments; an interior gap at i cuts between i-1
    // and i, boundary gaps (0, size) cut nothing.
    std::vector<std::pair<int, int>> segments;  // [begin, end)
    int begin = 0;
    for (int i = 1; i < static_cast<int>(p.as_path.size()); ++i) {
      if (std::find(p.gaps.begin(), p.gaps.end(), i) != p.gaps.end()) {
        segments.emplace_back(begin, i);
        begin = i;
      }
    }
    segments.emplace_back(begin, static_cast<int>(p.as_path.size()));

    struct PendingConstraint {
      EdgeKey pair;
      std::uint8_t allowed;
    };
    std::vector<PendingConstraint> pending;
    bool feasible = true;

    for (auto [s, e] : segments) {
      int k = e - s - 1;  // edge count
      if (k < 1) continue;
      std::vector<std::uint8_t> options(k);
      for (int j = 0; j < k; ++j)
        options[j] = letter_options(g, p.as_path[s + j], p.as_path[s + j + 1]);

      auto letters = feasible_letters(options);
      if (std::any_of(letters.begin(), letters.end(), [](std::uint8_t m) { return m == 0; })) {
        feasible = false;
        break;
      }
      for (int j = 0; j < k; ++j) {
        AsNum from = p.as_path[s + j];
        AsNum to = p.as_path[s + j + 1];
        if (g.edge(from, to)) continue;  // known edges are fixed points, not output
        std::uint8_t allowed = 0;
        for (StepLetter l : kLetters)
          if (letters[j] & (1u << static_cast<int>(l))) allowed |= constraint_bit(from, to, l);
        pending.push_back({EdgeKey(from, to), allowed});
      }
    }

    if (!feasible) {
      result.report.infeasible_paths.push_back(p.source_id);
      continue;
    }
    for (const auto& pc : pending) {
      auto [it, inserted] = intersection.emplace(pc.pair, pc.allowed);
      if (!inserted) it->second &= pc.allowed;
    }
  }

  for (const auto& [pair, allowed] : intersection) {
    if (allowed == 0) {
      result.report.empty_intersections.push_back(pair);
      result.constraints.push_back({pair, kAllowAll});  // irreconcilable: keep it, unlabeled
    } else {
      result.constraints.push_back({pair, allowed});
    }
  }
  return result;
}

CampaignState evaluate_campaign(std::span<const std::int64_t> per_batch_new_edges) {
  CampaignState state;
  int zero_run = 0;
  for (std::size_t i = 0; i < per_batch_new_edges.size(); ++i) {
    state.batch_sizes.push_back(static_cast<int>(5 * (i + 1)));
    state.new_edge_counts.push_back(per_batch_new_edges[i]);
    zero_run = per_batch_new_edges[i] == 0 ? zero_run + 1 : 0;
    if (!state.stopped && zero_run >= 3) {
      state.stopped = true;
      state.stopped_after = static_cast<int>(i);
    }
  }
  return state;
}

}  // namespace freetopo
