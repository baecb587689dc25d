#pragma once

// Study-design helpers: split a roster into k equal groups with matching GPA
// mean and variance, then compare combined quiz scores between group pairs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "coriolis/error.hpp"

namespace coriolis::study {

inline constexpr double kMaxGpa = 4.3;

struct StudentRecord {
  std::string id;
  double gpa = 0.0;
  std::optional<double> quiz_score;

  friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

/// Population statistics (variance divides by n).
struct GroupStats {
  double mean = 0.0;
  double variance = 0.0;
};

inline GroupStats population_stats(std::span<const double> xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / n};
}

enum class SearchMethod { exact, heuristic };

inline const char* to_string(SearchMethod m) { return m == SearchMethod::exact ? "exact" : "heuristic"; }

struct BalanceOptions {
  double variance_weight = 1.0;
  double exact_limit = 1e6;  // largest partition count searched exhaustively
  int restarts = 32;
};

struct GroupAssignment {
  std::vector<std::vector<StudentRecord>> groups;
  std::vector<GroupStats> stats;
  GroupStats overall;
  double objective = 0.0;
  SearchMethod method = SearchMethod::exact;
};

inline void validate_roster(std::span<const StudentRecord> roster) {
  std::set<std::string> seen;
  for (const auto& s : roster) {
    if (!std::isfinite(s.gpa) || s.gpa < 0.0 || s.gpa > kMaxGpa)
      throw Error(ErrorKind::invalid_input, "gpa out of range for " + s.id);
    if (s.quiz_score && (!std::isfinite(*s.quiz_score) || *s.quiz_score < 0.0))
      throw Error(ErrorKind::invalid_input, "quiz score must be >= 0 for " + s.id);
    if (!seen.insert(s.id).second) throw Error(ErrorKind::invalid_input, "duplicate id " + s.id);
  }
}

/// Number of ways to split n items into k unlabelled groups of n/k.
inline double partition_count(std::size_t n, std::size_t k) {
  const std::size_t m = n / k;
  double count = 1.0;
  for (std::size_t g = 0; g < k; ++g) {
    // The first unplaced item picks its m-1 companions from the rest.
    const std::size_t rest = n - g * m - 1;
    double c = 1.0;
    for (std::size_t i = 1; i < m; ++i) c = c * static_cast<double>(rest - m + 1 + i) / static_cast<double>(i);
    count *= std::round(c);
  }
  return count;
}

namespace detail {

using Labels = std::vector<int>;  // group label per roster index

struct Evaluator {
  std::span<const StudentRecord> roster;
  std::size_t k;
  std::size_t m;
  double weight;
  GroupStats overall;

  std::vector<GroupStats> stats(const Labels& labels) const {
    std::vector<std::vector<double>> values(k);
    for (std::size_t i = 0; i < labels.size(); ++i) values[labels[i]].push_back(roster[i].gpa);
    std::vector<GroupStats> out;
    for (const auto& v : values) out.push_back(population_stats(v));
    return out;
  }

  double objective(const std::vector<GroupStats>& st) const {
    double j = 0.0;
    for (const auto& s : st) {
      const double dm = s.mean - overall.mean;
      const double dv = s.variance - overall.variance;
      j += dm * dm + weight * dv * dv;
    }
    return j;
  }

  double objective(const Labels& labels) const { return objective(stats(labels)); }

  // Groups as sorted id lists, ordered; used to break exact ties.
  std::vector<std::vector<std::string>> canonical(const Labels& labels) const {
    std::vector<std::vector<std::string>> groups(k);
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(roster[i].id);
    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::sort(groups.begin(), groups.end());
    return groups;
  }

  bool better(double j1, const Labels& a, double j2, const Labels& b) const {
    if (j1 != j2) return j1 < j2;
    return canonical(a) < canonical(b);
  }
};

// Enumerates every unlabelled equal-size partition. An item may open a new
// group only if it is the lowest-numbered empty one.
inline void enumerate(const Evaluator& ev, Labels& labels, std::vector<std::size_t>& sizes,
                      std::size_t i, std::size_t open, Labels& best, double& best_j) {
  if (i == labels.size()) {
    const double j = ev.objective(labels);
    if (best.empty() || ev.better(j, labels, best_j, best)) {
      best = labels;
      best_j = j;
    }
    return;
  }
  const std::size_t limit = std::min(open + 1, ev.k);
  for (std::size_t g = 0; g < limit; ++g) {
    if (sizes[g] == ev.m) continue;
    labels[i] = static_cast<int>(g);
    ++sizes[g];
    enumerate(ev, labels, sizes, i + 1, std::max(open, g + 1), best, best_j);
    --sizes[g];
  }
}

// Running sums of centred values per group for O(1) swap evaluation.
struct SwapState {
  const Evaluator& ev;
  std::vector<double> centred;
  Labels labels;
  std::vector<double> s1, s2;

  SwapState(const Evaluator& e, Labels l) : ev(e), labels(std::move(l)), s1(e.k), s2(e.k) {
    for (const auto& r : ev.roster) centred.push_back(r.gpa - ev.overall.mean);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      s1[labels[i]] += centred[i];
      s2[labels[i]] += centred[i] * centred[i];
    }
  }

  double term(double a, double b) const {
    const double m = static_cast<double>(ev.m);
    const double dm = a / m;
    const double var = b / m - dm * dm;
    const double dv = var - ev.overall.variance;
    return dm * dm + ev.weight * dv * dv;
  }

  double total() const {
    double j = 0.0;
    for (std::size_t g = 0; g < ev.k; ++g) j += term(s1[g], s2[g]);
    return j;
  }

  double swap_delta(std::size_t a, std::size_t b) const {
    const int ga = labels[a], gb = labels[b];
    const double xa = centred[a], xb = centred[b];
    const double before = term(s1[ga], s2[ga]) + term(s1[gb], s2[gb]);
    const double after = term(s1[ga] - xa + xb, s2[ga] - xa * xa + xb * xb) +
                         term(s1[gb] - xb + xa, s2[gb] - xb * xb + xa * xa);
    return after - before;
  }

  void swap(std::size_t a, std::size_t b) {
    const int ga = labels[a], gb = labels[b];
    const double xa = centred[a], xb = centred[b];
    s1[ga] += xb - xa;
    s2[ga] += xb * xb - xa * xa;
    s1[gb] += xa - xb;
    s2[gb] += xa * xa - xb * xb;
    std::swap(labels[a], labels[b]);
  }

  // Best-improvement pairwise swaps until no swap lowers the objective.
  void descend() {
    const std::size_t n = labels.size();
    for (;;) {
      double best = -1e-15;
      std::size_t ba = n, bb = n;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          if (labels[a] == labels[b]) continue;
          const double d = swap_delta(a, b);
          if (d < best) {
            best = d;
            ba = a;
            bb = b;
          }
        }
      if (ba == n) return;
      swap(ba, bb);
    }
  }
};

inline Labels round_robin_seed(const Evaluator& ev) {
  const std::size_t n = ev.roster.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ev.roster[a].gpa != ev.roster[b].gpa) return ev.roster[a].gpa > ev.roster[b].gpa;
    return ev.roster[a].id < ev.roster[b].id;
  });
  Labels labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[order[i]] = static_cast<int>(i % ev.k);
  return labels;
}

}  // namespace detail

/// Splits the roster into k equal groups minimising
///   J = sum_g (mean_g - mean)^2 + w (var_g - var)^2.
/// Exhaustive when the partition count is within `exact_limit`, otherwise a
/// swap local search from a sorted round-robin seed with deterministic
/// restarts. Ties go to the lexicographically smallest grouping.
inline GroupAssignment balance_groups(std::span<const StudentRecord> roster, int k,
                                      const BalanceOptions& options = {}) {
  if (k < 2) throw Error(ErrorKind::parameter, "need at least 2 groups");
  if (roster.empty() || roster.size() % static_cast<std::size_t>(k) != 0)
    throw Error(ErrorKind::size, "roster size must be a positive multiple of k");
  if (!std::isfinite(options.variance_weight) || options.variance_weight < 0.0)
    throw Error(ErrorKind::parameter, "variance weight must be >= 0");
  validate_roster(roster);

  std::vector<double> all;
  for (const auto& s : roster) all.push_back(s.gpa);
  const detail::Evaluator ev{roster, static_cast<std::size_t>(k),
                             roster.size() / static_cast<std::size_t>(k), options.variance_weight,
                             population_stats(all)};

  detail::Labels best;
  double best_j = 0.0;
  SearchMethod method = SearchMethod::exact;
  if (partition_count(roster.size(), ev.k) <= options.exact_limit) {
    detail::Labels labels(roster.size(), -1);
    std::vector<std::size_t> sizes(ev.k, 0);
    detail::enumerate(ev, labels, sizes, 0, 0, best, best_j);
  } else {
    method = SearchMethod::heuristic;
    const detail::Labels seed = detail::round_robin_seed(ev);
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
      detail::Labels start = seed;
      if (r > 0) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(r));
        for (std::size_t i = start.size() - 1; i > 0; --i)
          std::swap(start[i], start[static_cast<std::size_t>(rng() % (i + 1))]);
      }
      detail::SwapState state(ev, std::move(start));
      state.descend();
      const double j = ev.objective(state.labels);
      if (best.empty() || ev.better(j, state.labels, best_j, best)) {
        best = state.labels;
        best_j = j;
      }
    }
  }

  // Label groups in order of their first member's roster position.
  std::vector<int> relabel(ev.k, -1);
  int next = 0;
  for (int g : best)
    if (relabel[g] < 0) relabel[g] = next++;

  GroupAssignment out;
  out.groups.resize(ev.k);
  for (std::size_t i = 0; i < roster.size(); ++i) out.groups[relabel[best[i]]].push_back(roster[i]);
  for (const auto& g : out.groups) {
    std::vector<double> v;
    for (const auto& s : g) v.push_back(s.gpa);
    out.stats.push_back(population_stats(v));
  }
  out.overall = ev.overall;
  out.objective = ev.objective(out.stats);
  out.method = method;
  return out;
}

/// Sum of the members' quiz scores.
inline double combined_score(std::span<const StudentRecord> group) {
  if (group.empty()) throw Error(ErrorKind::incomplete_data, "empty group");
  double sum = 0.0;
  for (const auto& s : group) {
    if (!s.quiz_score) throw Error(ErrorKind::incomplete_data, "missing quiz score for " + s.id);
    sum += *s.quiz_score;
  }
  return sum;
}

inline double mean_score(std::span<const StudentRecord> group) {
  return combined_score(group) / static_cast<double>(group.size());
}

/// Groups are referenced 1-based, as in "Group 3".
struct PairSpec {
  std::string pair_id;
  int control = 0;
  int experimental = 0;
  std::string independent_variable;
  std::string dependent_variable = "Quiz Score";
};

/// The four comparisons run in the classroom study.
inline std::vector<PairSpec> classroom_pairs() {
  return {
      {"G1-G4", 1, 4, "Trials and visuo-haptic simulation"},
      {"G2-G3", 2, 3, "Haptic component"},
      {"G3-G4", 3, 4, "Trials"},
      {"G1-G3", 1, 3, "Visuo-haptic simulation"},
  };
}

/// Percentage change of the experimental combined score over the control.
inline double pair_delta(double control_combined, double experimental_combined) {
  if (control_combined == 0.0) throw Error(ErrorKind::undefined_delta, "control score is zero");
  return 100.0 * (experimental_combined - control_combined) / control_combined;
}

namespace detail {

inline const std::vector<StudentRecord>& group_ref(const GroupAssignment& a, int g) {
  if (g < 1 || static_cast<std::size_t>(g) > a.groups.size())
    throw Error(ErrorKind::reference, "no group " + std::to_string(g));
  return a.groups[static_cast<std::size_t>(g - 1)];
}

}  // namespace detail

inline double pair_delta(const PairSpec& pair, const GroupAssignment& a) {
  if (pair.control == pair.experimental)
    throw Error(ErrorKind::reference, pair.pair_id + ": control and experimental must differ");
  return pair_delta(combined_score(detail::group_ref(a, pair.control)),
                    combined_score(detail::group_ref(a, pair.experimental)));
}

struct ReportRow {
  std::string pair_id;
  int control = 0;
  int experimental = 0;
  std::string independent_variable;
  std::string dependent_variable;
  double delta_percent = 0.0;
};

struct GroupSummary {
  int group = 0;
  std::size_t size = 0;
  double gpa_mean = 0.0;
  double gpa_variance = 0.0;
  std::optional<double> combined;
  std::optional<double> mean;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<GroupSummary> groups;
  double objective = 0.0;
  SearchMethod method = SearchMethod::exact;
};

/// One row per pair, in the order given; pair ids must be unique.
inline Report report(const GroupAssignment& a, std::span<const PairSpec> pairs) {
  Report r;
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.pair_id).second)
      throw Error(ErrorKind::reference, "duplicate pair id " + p.pair_id);
    detail::group_ref(a, p.control);
    detail::group_ref(a, p.experimental);
    r.rows.push_back({p.pair_id, p.control, p.experimental, p.independent_variable,
                      p.dependent_variable, pair_delta(p, a)});
  }
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    GroupSummary s{static_cast<int>(g + 1), a.groups[g].size(), a.stats[g].mean,
                   a.stats[g].variance, std::nullopt, std::nullopt};
    const bool complete = !a.groups[g].empty() &&
                          std::all_of(a.groups[g].begin(), a.groups[g].end(),
                                      [](const StudentRecord& st) { return st.quiz_score.has_value(); });
    if (complete) {
      s.combined = combined_score(a.groups[g]);
      s.mean = mean_score(a.groups[g]);
    }
    r.groups.push_back(s);
  }
  r.objective = a.objective;
  r.method = a.method;
  return r;
}

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string signed_percent(double v) {
  std::string s = fixed(v, 1);
  if (v >= 0.0 && s.front() != '-') s.insert(s.begin(), '+');
  if (s == "-0.0") s = "+0.0";
  return s;
}

inline std::string group_name(int g) { return "Group " + std::to_string(g); }

}  // namespace detail

inline std::string to_text(const Report& r) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Pair ID", "Control group", "Experimental group", "Independent variable",
                   "Dependent variable", "Delta %"});
  for (const auto& row : r.rows)
    cells.push_back({row.pair_id, detail::group_name(row.control),
                     detail::group_name(row.experimental), row.independent_variable,
                     row.dependent_variable, detail::signed_percent(row.delta_percent)});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

  std::ostringstream os;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) text += "  ";
      text += line[c];
      text.append(width[c] - line[c].size(), ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  }
  os << '\n' << "Group  Size  GPA mean  GPA variance  Combined score  Mean score\n";
  for (const auto& g : r.groups) {
    os << std::left << std::setw(5) << g.group << "  " << std::setw(4) << g.size << "  "
       << std::setw(8) << detail::fixed(g.gpa_mean, 4) << "  " << std::setw(12)
       << detail::fixed(g.gpa_variance, 4) << "  " << std::setw(14)
       << (g.combined ? detail::fixed(*g.combined, 2) : std::string("-")) << "  "
       << (g.mean ? detail::fixed(*g.mean, 2) : std::string("-")) << '\n';
  }
  os << "objective J = " << std::setprecision(6) << std::scientific << r.objective << " ("
     << to_string(r.method) << ")\n";
  return os.str();
}

inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  os << "pair_id,control,experimental,independent_variable,dependent_variable,delta_percent\n";
  os << std::setprecision(17);
  for (const auto& row : r.rows)
    os << row.pair_id << ',' << detail::group_name(row.control) << ','
       << detail::group_name(row.experimental) << ',' << row.independent_variable << ','
       << row.dependent_variable << ',' << row.delta_percent << '\n';
  return os.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_number(const std::string& s, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::invalid_input, "bad number '" + s + "' at line " + std::to_string(lineno));
}

// Accepts "Group 3", "G3" or "3".
inline int parse_group(const std::string& s, std::size_t lineno) {
  std::string digits = s;
  if (digits.rfind("Group", 0) == 0) digits = digits.substr(5);
  else if (!digits.empty() && (digits[0] == 'G' || digits[0] == 'g')) digits = digits.substr(1);
  const auto b = digits.find_first_not_of(' ');
  digits = b == std::string::npos ? "" : digits.substr(b);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
    throw Error(ErrorKind::invalid_input, "bad group '" + s + "' at line " + std::to_string(lineno));
  return std::stoi(digits);
}

}  // namespace detail

/// Roster CSV: `id,gpa[,quiz_score]`; a header starting with "id" is skipped.
inline std::vector<StudentRecord> parse_roster(std::istream& in) {
  std::vector<StudentRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = detail::split_csv(line);
    if (f.size() == 1 && f[0].empty()) continue;
    if (lineno == 1 && f[0] == "id") continue;
    if (f.size() < 2 || f.size() > 3)
      throw Error(ErrorKind::invalid_input, "expected id,gpa[,quiz_score] at line " + std::to_string(lineno));
    StudentRecord s{f[0], detail::parse_number(f[1], lineno), std::nullopt};
    if (f.size() == 3 && !f[2].empty()) s.quiz_score = detail::parse_number(f[2], lineno);
    out.push_back(std::move(s));
  }
  validate_roster(out);
  return out;
}

/// Pairs file: `pair_id,control,experimental,independent_variable` per line.
inline std::vector<PairSpec> parse_pairs(std::istream& in) {
  std::vector<PairSpec> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = detail::split_csv(line);
    if (f.size() == 1 && f[0].empty()) continue;
    if (lineno == 1 && f[0] == "pair_id") continue;
    if (f.size() != 4)
      throw Error(ErrorKind::invalid_input, "expected 4 fields at line " + std::to_string(lineno));
    PairSpec p{f[0], detail::parse_group(f[1], lineno), detail::parse_group(f[2], lineno), f[3]};
    if (p.control == p.experimental)
      throw Error(ErrorKind::invalid_input, "control equals experimental at line " + std::to_string(lineno));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace coriolis::study
