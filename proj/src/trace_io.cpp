#include "eigenflow/errors.hpp"
#include "eigenflow/monotonicity.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eigenflow {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_field(const std::string& s, int line_no, const std::string& column) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw InvalidInput("trace line " + std::to_string(line_no) + ": bad number '" + s + "' in column " + column);
  return v;
}

void put(std::ostream& out, double v) {
  if (std::isnan(v))
    out << "nan";
  else
    out << v;
}

}  // namespace

void write_trace_csv(const EigenTrace& trace, std::ostream& out) {
  out.precision(17);
  for (const auto& [key, value] : trace.metadata) out << "# " << key << ": " << value << '\n';
  const auto names = trace.column_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& r : trace.records) {
    for (double v : {r.t, r.dt, r.area, r.H_min, r.H_max, r.avg_H2, r.pinch_dev, r.kappa, r.K_accum, r.phi,
                     r.t_tilde, r.lambda1, r.lambda1_residual, r.envelope, r.eq12_rhs}) {
      put(out, v);
      out << ',';
    }
    put(out, r.fd_dlambda1);
    for (std::size_t j = 0; j < trace.p_values.size(); ++j) {
      out << ',';
      put(out, r.lambda1p[j]);
      out << ',';
      put(out, r.eq13_rhs[j]);
    }
    out << '\n';
  }
}

std::string trace_to_csv(const EigenTrace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  return os.str();
}

void save_trace(const EigenTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write trace " + path.string());
  write_trace_csv(trace, out);
}

EigenTrace parse_trace(std::istream& in) {
  EigenTrace trace;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        const std::string key = line.substr(line.find_first_not_of("# "), colon - line.find_first_not_of("# "));
        trace.metadata[key] = colon + 2 <= line.size() ? line.substr(colon + 2) : "";
      }
      continue;
    }
    header = split(line);
    break;
  }
  if (header.empty()) throw InvalidInput("trace has no header");

  // base columns must all be present; p columns come in lambda1p_/eq13_rhs_ pairs
  EigenTrace probe;
  const auto base = probe.column_names();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const auto& name : base)
    if (!index.count(name)) throw InvalidInput("trace is missing column " + name);
  std::vector<std::string> labels;
  for (const auto& name : header) {
    if (name.starts_with("lambda1p_")) {
      const std::string label = name.substr(9);
      if (!index.count("eq13_rhs_" + label)) throw InvalidInput("trace is missing column eq13_rhs_" + label);
      labels.push_back(label);
      trace.p_values.push_back(parse_field(label, line_no, name));
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw InvalidInput("trace line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(header.size()));
    auto get = [&](const std::string& name) { return parse_field(fields[index.at(name)], line_no, name); };
    TraceRecord r;
    r.t = get("t");
    r.dt = get("dt");
    r.area = get("area");
    r.H_min = get("H_min");
    r.H_max = get("H_max");
    r.avg_H2 = get("avg_H2");
    r.pinch_dev = get("pinch_dev");
    r.kappa = get("kappa");
    r.K_accum = get("K_accum");
    r.phi = get("phi");
    r.t_tilde = get("t_tilde");
    r.lambda1 = get("lambda1");
    r.lambda1_residual = get("lambda1_residual");
    r.envelope = get("envelope");
    r.eq12_rhs = get("eq12_rhs");
    r.fd_dlambda1 = get("fd_dlambda1");
    for (const auto& label : labels) {
      r.lambda1p.push_back(get("lambda1p_" + label));
      r.eq13_rhs.push_back(get("eq13_rhs_" + label));
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

EigenTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trace " + path.string());
  return parse_trace(in);
}

}  // namespace eigenflow
