#include "blens/case_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include "blens/log.hpp"

namespace blens {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '%') in_comment = true;
    if (c == '\n') in_comment = false;
    out.push_back(in_comment ? ' ' : c);
  }
  return out;
}

double parse_number(const std::string& token, const std::string& context) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw MalformedCase("bad number '" + token + "' in " + context);
  }
  return value;
}

/// Extracts the matrix assigned to `mpc.<field> = [ ... ];` as rows of
/// doubles. Returns std::nullopt when the field is absent.
std::optional<std::vector<std::vector<double>>> extract_matrix(
    const std::string& text, const std::string& field) {
  const std::string key = "mpc." + field;
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    size_t cursor = pos + key.size();
    while (cursor < text.size() && std::isspace(static_cast<unsigned char>(text[cursor]))) ++cursor;
    if (cursor >= text.size() || text[cursor] != '=') {
      pos = cursor;
      continue;
    }
    ++cursor;
    while (cursor < text.size() && std::isspace(static_cast<unsigned char>(text[cursor]))) ++cursor;
    if (cursor >= text.size() || text[cursor] != '[') {
      throw MalformedCase("expected matrix literal for " + key);
    }
    size_t close = text.find(']', cursor);
    if (close == std::string::npos) {
      throw MalformedCase("unterminated matrix literal for " + key);
    }
    std::string body = text.substr(cursor + 1, close - cursor - 1);

    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    std::string token;
    auto flush_token = [&] {
      if (!token.empty()) {
        row.push_back(parse_number(token, key));
        token.clear();
      }
    };
    auto flush_row = [&] {
      flush_token();
      if (!row.empty()) {
        rows.push_back(row);
        row.clear();
      }
    };
    for (char c : body) {
      if (c == ';' || c == '\n') {
        flush_row();
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        flush_token();
      } else {
        token.push_back(c);
      }
    }
    flush_row();
    return rows;
  }
  return std::nullopt;
}

std::optional<double> extract_scalar(const std::string& text, const std::string& field) {
  const std::string key = "mpc." + field;
  size_t pos = text.find(key);
  if (pos == std::string::npos) return std::nullopt;
  size_t cursor = pos + key.size();
  while (cursor < text.size() && (std::isspace(static_cast<unsigned char>(text[cursor])) || text[cursor] == '=')) {
    ++cursor;
  }
  size_t end = cursor;
  while (end < text.size() && text[end] != ';' && text[end] != '\n') ++end;
  std::string token = text.substr(cursor, end - cursor);
  token.erase(std::remove_if(token.begin(), token.end(),
                             [](unsigned char c) { return std::isspace(c); }),
              token.end());
  if (token.empty()) return std::nullopt;
  return parse_number(token, key);
}

void check_connected(const NetworkCase& nc) {
  const int n = static_cast<int>(nc.buses.size());
  std::vector<std::vector<int>> adj(n);
  for (const Branch& br : nc.branches) {
    int a = nc.bus_index(br.from);
    int b = nc.bus_index(br.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::deque<int> queue{nc.slack_index()};
  seen[nc.slack_index()] = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) {
      throw InvalidTopology("bus " + std::to_string(nc.buses[i].id) +
                            " is not connected to the slack bus");
    }
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

int NetworkCase::bus_index(int id) const {
  for (size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<int>(i);
  }
  throw MalformedCase("unknown bus id " + std::to_string(id));
}

bool NetworkCase::has_bus(int id) const {
  return std::any_of(buses.begin(), buses.end(),
                     [id](const Bus& b) { return b.id == id; });
}

int NetworkCase::slack_index() const {
  for (size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
  }
  throw InvalidTopology("case has no slack bus");
}

NetworkCase parse_matpower_case(const std::string& text, const std::string& name) {
  const std::string clean = strip_comments(text);

  NetworkCase nc;
  nc.name = name;
  if (auto base = extract_scalar(clean, "baseMVA")) {
    nc.base_mva = *base;
  } else {
    throw MalformedCase("missing mpc.baseMVA");
  }
  if (!(nc.base_mva > 0.0)) throw MalformedCase("baseMVA must be positive");

  auto bus_rows = extract_matrix(clean, "bus");
  auto branch_rows = extract_matrix(clean, "branch");
  auto gen_rows = extract_matrix(clean, "gen");
  if (!bus_rows || bus_rows->empty()) throw MalformedCase("missing mpc.bus matrix");
  if (!branch_rows) throw MalformedCase("missing mpc.branch matrix");

  std::set<int> seen_ids;
  int slack_count = 0;
  for (const auto& row : *bus_rows) {
    if (row.size() < 13) throw MalformedCase("bus row needs 13 columns");
    Bus b;
    b.id = static_cast<int>(row[0]);
    if (!seen_ids.insert(b.id).second) {
      throw MalformedCase("duplicate bus id " + std::to_string(b.id));
    }
    const int type = static_cast<int>(row[1]);
    switch (type) {
      case 1:
        b.kind = BusKind::PQ;
        break;
      case 2:
        b.kind = BusKind::PV;
        break;
      case 3:
        b.kind = BusKind::Slack;
        ++slack_count;
        break;
      case 4:
        throw InvalidTopology("bus " + std::to_string(b.id) + " is declared isolated");
      default:
        throw MalformedCase("bus " + std::to_string(b.id) + " has unknown type " +
                            std::to_string(type));
    }
    b.p_load = row[2] / nc.base_mva;
    b.q_load = row[3] / nc.base_mva;
    b.shunt_g = row[4] / nc.base_mva;
    b.shunt_b = row[5] / nc.base_mva;
    b.v_set = row[7];
    b.angle_set = row[8] * kDegToRad;
    nc.buses.push_back(b);
  }
  if (slack_count != 1) {
    throw InvalidTopology("case must declare exactly one slack bus, found " +
                          std::to_string(slack_count));
  }

  for (const auto& row : *branch_rows) {
    if (row.size() < 11) throw MalformedCase("branch row needs 11 columns");
    if (static_cast<int>(row[10]) == 0) continue;  // out of service
    Branch br;
    br.from = static_cast<int>(row[0]);
    br.to = static_cast<int>(row[1]);
    if (!nc.has_bus(br.from) || !nc.has_bus(br.to)) {
      throw MalformedCase("branch references unknown bus " + std::to_string(br.from) +
                          "-" + std::to_string(br.to));
    }
    if (br.from == br.to) {
      throw MalformedCase("branch " + std::to_string(br.from) + " is a self loop");
    }
    br.r = row[2];
    br.x = row[3];
    br.b_charging = row[4];
    br.tap = row[8] == 0.0 ? 1.0 : row[8];
    if (!(br.tap > 0.0)) throw MalformedCase("branch tap ratio must be positive");
    br.shift = row[9] * kDegToRad;
    nc.branches.push_back(br);
  }

  // Merge in-service generators per bus; a PV or slack bus takes its
  // magnitude setpoint from the (consistent) generator voltage targets.
  std::map<int, Generator> merged;
  if (gen_rows) {
    for (const auto& row : *gen_rows) {
      if (row.size() < 8) throw MalformedCase("gen row needs 8 columns");
      if (static_cast<int>(row[7]) == 0) continue;  // out of service
      Generator g;
      g.bus = static_cast<int>(row[0]);
      if (!nc.has_bus(g.bus)) {
        throw MalformedCase("generator references unknown bus " + std::to_string(g.bus));
      }
      g.p_set = row[1] / nc.base_mva;
      g.q_set = row[2] / nc.base_mva;
      g.v_set = row[5];
      auto [it, inserted] = merged.emplace(g.bus, g);
      if (!inserted) {
        const BusKind kind = nc.buses[nc.bus_index(g.bus)].kind;
        if (kind != BusKind::PQ && std::abs(it->second.v_set - g.v_set) > 1e-6) {
          throw MalformedCase("generators at bus " + std::to_string(g.bus) +
                              " disagree on the voltage setpoint");
        }
        it->second.p_set += g.p_set;
        it->second.q_set += g.q_set;
      }
    }
  }
  for (auto& [bus_id, gen] : merged) {
    Bus& bus = nc.buses[nc.bus_index(bus_id)];
    if (bus.kind != BusKind::PQ) bus.v_set = gen.v_set;
    nc.generators.push_back(gen);
  }

  // A PV bus without an in-service generator has nothing to hold its
  // magnitude; demote it to PQ instead of rejecting the case.
  for (Bus& bus : nc.buses) {
    if (bus.kind == BusKind::PV && merged.find(bus.id) == merged.end()) {
      BLENS_LOG_WARN("bus ", bus.id, " is PV without a live generator; treating as PQ");
      bus.kind = BusKind::PQ;
    }
  }

  check_connected(nc);
  return nc;
}

NetworkCase load_matpower_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedCase("cannot open case file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string name = path;
  if (size_t slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  if (name.size() > 2 && name.substr(name.size() - 2) == ".m") {
    name = name.substr(0, name.size() - 2);
  }
  return parse_matpower_case(buffer.str(), name);
}

std::string write_matpower_case(const NetworkCase& nc) {
  std::ostringstream os;
  const std::string fn = nc.name.empty() ? "mpcase" : nc.name;
  os << "function mpc = " << fn << "\n";
  os << "mpc.version = '2';\n";
  os << "mpc.baseMVA = " << format_double(nc.base_mva) << ";\n";

  os << "mpc.bus = [\n";
  for (const Bus& b : nc.buses) {
    int type = 1;
    if (b.kind == BusKind::PV) type = 2;
    if (b.kind == BusKind::Slack) type = 3;
    os << "\t" << b.id << "\t" << type << "\t" << format_double(b.p_load * nc.base_mva)
       << "\t" << format_double(b.q_load * nc.base_mva) << "\t"
       << format_double(b.shunt_g * nc.base_mva) << "\t"
       << format_double(b.shunt_b * nc.base_mva) << "\t1\t" << format_double(b.v_set)
       << "\t" << format_double(b.angle_set * kRadToDeg) << "\t135\t1\t1.1\t0.9;\n";
  }
  os << "];\n";

  os << "mpc.gen = [\n";
  for (const Generator& g : nc.generators) {
    os << "\t" << g.bus << "\t" << format_double(g.p_set * nc.base_mva) << "\t"
       << format_double(g.q_set * nc.base_mva) << "\t999\t-999\t"
       << format_double(g.v_set) << "\t" << format_double(nc.base_mva)
       << "\t1\t999\t-999\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0;\n";
  }
  os << "];\n";

  os << "mpc.branch = [\n";
  for (const Branch& br : nc.branches) {
    os << "\t" << br.from << "\t" << br.to << "\t" << format_double(br.r) << "\t"
       << format_double(br.x) << "\t" << format_double(br.b_charging)
       << "\t0\t0\t0\t" << format_double(br.tap) << "\t"
       << format_double(br.shift * kRadToDeg) << "\t1\t-360\t360;\n";
  }
  os << "];\n";
  return os.str();
}

NetworkCase scale_loads(const NetworkCase& network, double factor,
                        const ScalingOptions& options) {
  if (!(factor > 0.0)) throw MalformedCase("load factor must be positive");
  for (const auto& [id, weight] : options.bus_weights) {
    if (!network.has_bus(id)) {
      throw MalformedCase("scaling weight references unknown bus " + std::to_string(id));
    }
    if (!(weight >= 0.0)) {
      throw MalformedCase("scaling weight for bus " + std::to_string(id) +
                          " must be non-negative");
    }
  }
  NetworkCase out = network;
  for (Bus& b : out.buses) {
    double w = factor;
    if (auto it = options.bus_weights.find(b.id); it != options.bus_weights.end()) {
      w *= it->second;
    }
    b.p_load *= w;
    b.q_load *= w;
  }
  if (options.scale_generation) {
    for (Generator& g : out.generators) {
      double w = factor;
      if (auto it = options.bus_weights.find(g.bus); it != options.bus_weights.end()) {
        w *= it->second;
      }
      g.p_set *= w;
      g.q_set *= w;
    }
  }
  return out;
}

ScenarioSequence build_scenario_sequence(const NetworkCase& network,
                                         const std::vector<double>& factors,
                                         const ScalingOptions& options) {
  if (factors.empty()) throw MalformedCase("scenario schedule is empty");
  for (size_t i = 1; i < factors.size(); ++i) {
    if (!(factors[i] > factors[i - 1])) {
      throw UnsortedFactors("stress factors must be strictly increasing (" +
                            format_double(factors[i - 1]) + " then " +
                            format_double(factors[i]) + ")");
    }
  }
  ScenarioSequence seq;
  seq.scenarios.reserve(factors.size());
  for (size_t i = 0; i < factors.size(); ++i) {
    Scenario s;
    s.index = static_cast<int>(i) + 1;
    s.load_factor = factors[i];
    s.network = scale_loads(network, factors[i], options);
    seq.scenarios.push_back(std::move(s));
  }
  return seq;
}

std::vector<double> parse_factor_spec(const std::string& spec) {
  const std::string s = trim(spec);
  if (s.empty()) throw MalformedCase("empty factor specification");
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) {
      throw MalformedCase("range specification must be start:stop:step");
    }
    const double start = parse_number(parts[0], "factor range");
    const double stop = parse_number(parts[1], "factor range");
    const double step = parse_number(parts[2], "factor range");
    if (!(step > 0.0)) throw MalformedCase("factor range step must be positive");
    if (stop < start) throw MalformedCase("factor range stop must be >= start");
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-6)) + 1;
    for (int i = 0; i < count; ++i) out.push_back(start + i * step);
    // Snap the last value onto the requested stop when it lands there.
    if (!out.empty() && std::abs(out.back() - stop) < 1e-9 * std::max(1.0, std::abs(stop))) {
      out.back() = stop;
    }
  } else {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (part.empty()) continue;
      out.push_back(parse_number(part, "factor list"));
    }
    if (out.empty()) throw MalformedCase("empty factor specification");
  }
  return out;
}

std::map<int, double> parse_bus_scaling_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw MalformedCase("empty bus scaling CSV");
  std::string header = trim(line);
  header.erase(std::remove_if(header.begin(), header.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               header.end());
  if (header != "bus_id,factor") {
    throw MalformedCase("bus scaling CSV must start with header 'bus_id,factor'");
  }
  std::map<int, double> weights;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty()) continue;
    size_t comma = row.find(',');
    if (comma == std::string::npos) {
      throw MalformedCase("bus scaling CSV line " + std::to_string(line_no) +
                          " is missing a comma");
    }
    const std::string id_tok = trim(row.substr(0, comma));
    const std::string w_tok = trim(row.substr(comma + 1));
    const int id = static_cast<int>(parse_number(id_tok, "bus scaling CSV"));
    const double w = parse_number(w_tok, "bus scaling CSV");
    if (!weights.emplace(id, w).second) {
      throw MalformedCase("bus scaling CSV repeats bus " + std::to_string(id));
    }
  }
  return weights;
}

std::map<int, double> load_bus_scaling_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedCase("cannot open bus scaling CSV: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_bus_scaling_csv(buffer.str());
}

}  // namespace blens
