#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ergolab/error.hpp"

namespace ergolab::cli {

void invalid(const std::string& where, const std::string& what) {
  throw Error(Errc::InvalidConfig, where + ": " + what);
}

ObjectReader::ObjectReader(const json& value, std::string path) : value_(value), path_(std::move(path)) {
  if (!value_.is_object()) invalid(path_, "expected an object");
}

bool ObjectReader::has(const std::string& key) const { return value_.contains(key); }

const json& ObjectReader::required(const std::string& key) {
  seen_.insert(key);
  if (!value_.contains(key)) invalid(path_of(key), "missing");
  return value_.at(key);
}

const json* ObjectReader::optional(const std::string& key) {
  seen_.insert(key);
  if (!value_.contains(key) || value_.at(key).is_null()) return nullptr;
  return &value_.at(key);
}

double ObjectReader::number(const std::string& key) { return parse_number(required(key), path_of(key)); }

double ObjectReader::number_or(const std::string& key, double fallback) {
  const json* v = optional(key);
  return v ? parse_number(*v, path_of(key)) : fallback;
}

std::int64_t ObjectReader::integer(const std::string& key) { return parse_integer(required(key), path_of(key)); }

std::int64_t ObjectReader::integer_or(const std::string& key, std::int64_t fallback) {
  const json* v = optional(key);
  return v ? parse_integer(*v, path_of(key)) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  const json* v = optional(key);
  if (!v) return fallback;
  if (!v->is_boolean()) invalid(path_of(key), "expected true or false");
  return v->get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  const json& v = required(key);
  if (!v.is_string()) invalid(path_of(key), "expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string_or(const std::string& key, std::string fallback) {
  const json* v = optional(key);
  if (!v) return fallback;
  if (!v->is_string()) invalid(path_of(key), "expected a string");
  return v->get<std::string>();
}

void ObjectReader::finish() const {
  for (const auto& [key, _] : value_.items())
    if (!seen_.count(key)) invalid(path_of(key), "unknown key");
}

// ---------------------------------------------------------------------------

namespace {

bool parse_int_text(std::string_view text, std::int64_t& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

}  // namespace

double parse_number(const json& value, const std::string& path) {
  if (value.is_number()) {
    const double v = value.get<double>();
    if (!std::isfinite(v)) invalid(path, "number must be finite");
    return v;
  }
  if (!value.is_string()) invalid(path, "expected a number or a rational string \"p/q\"");
  const std::string text = value.get<std::string>();
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    std::int64_t p = 0, q = 0;
    if (!parse_int_text(std::string_view(text).substr(0, slash), p) ||
        !parse_int_text(std::string_view(text).substr(slash + 1), q))
      invalid(path, "malformed rational \"" + text + "\"");
    if (q <= 0) invalid(path, "rational \"" + text + "\" needs a positive denominator");
    if (std::llabs(p) > (std::int64_t{1} << 53) || q > (std::int64_t{1} << 53))
      invalid(path, "rational \"" + text + "\" exceeds 2^53");
    return static_cast<double>(p) / static_cast<double>(q);
  }
  std::int64_t i = 0;
  if (parse_int_text(text, i)) return static_cast<double>(i);
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  if (!in || in.peek() != std::char_traits<char>::eof() || !std::isfinite(v))
    invalid(path, "malformed number \"" + text + "\"");
  return v;
}

std::int64_t parse_integer(const json& value, const std::string& path) {
  if (value.is_number_integer()) {
    if (value.is_number_unsigned() && value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      invalid(path, "integer out of range");
    return value.get<std::int64_t>();
  }
  if (value.is_string()) {
    std::int64_t i = 0;
    if (parse_int_text(value.get<std::string>(), i)) return i;
  }
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  invalid(path, "expected an integer");
}

std::vector<double> parse_numbers(const json& value, const std::string& path) {
  if (!value.is_array()) invalid(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(parse_number(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::int64_t> parse_integers(const json& value, const std::string& path) {
  if (!value.is_array()) invalid(path, "expected an array");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(parse_integer(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> parse_matrix(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) invalid(path, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < value.size(); ++i) {
    rows.push_back(parse_numbers(value[i], path + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != value.size()) invalid(path, "matrix must be square");
  }
  return rows;
}

std::vector<std::vector<std::int64_t>> parse_tuples(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) invalid(path, "expected a non-empty array of time tuples");
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(parse_integers(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------

systems::System parse_system(const json& value, const std::string& path) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  if (type == "bernoulli") {
    const auto p = parse_numbers(r.required("probabilities"), r.path_of("probabilities"));
    const bool invertible = r.boolean_or("invertible", true);
    r.finish();
    return systems::bernoulli_shift(p, invertible);
  }
  if (type == "markov") {
    const auto t = parse_matrix(r.required("transition"), r.path_of("transition"));
    const auto m = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd P(m, m);
    Eigen::MatrixXi A(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        P(i, j) = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        A(i, j) = P(i, j) > 0.0 ? 1 : 0;
      }
    if (const json* adj = r.optional("adjacency")) {
      const auto a = parse_matrix(*adj, r.path_of("adjacency"));
      if (a.size() != t.size()) invalid(r.path_of("adjacency"), "size differs from the transition matrix");
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) A(i, j) = static_cast<int>(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    const bool invertible = r.boolean_or("invertible", true);
    r.finish();
    return systems::build_shift(A, P, invertible);
  }
  if (type == "torus") {
    const auto rows = parse_matrix(r.required("matrix"), r.path_of("matrix"));
    const auto d = static_cast<Eigen::Index>(rows.size());
    systems::IntMatrix M(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (v != std::floor(v) || std::abs(v) > 9.0e15) invalid(r.path_of("matrix"), "entries must be integers");
        M(i, j) = static_cast<std::int64_t>(v);
      }
    const auto bits = r.integer_or("precision_bits", 128);
    if (bits < 8 || bits > 128) invalid(r.path_of("precision_bits"), "must lie in [8, 128]");
    r.finish();
    return systems::build_torus(M, static_cast<int>(bits));
  }
  invalid(r.path_of("type"), "unknown system type \"" + type + "\" (bernoulli, markov, torus)");
}

namespace {

std::vector<systems::TrigTerm> parse_terms(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) invalid(path, "expected a non-empty array of terms");
  std::vector<systems::TrigTerm> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    ObjectReader t(value[i], path + "[" + std::to_string(i) + "]");
    systems::TrigTerm term;
    term.frequency = parse_integers(t.required("frequency"), t.path_of("frequency"));
    term.cos_coef = t.number_or("cos", 0.0);
    term.sin_coef = t.number_or("sin", 0.0);
    t.finish();
    out.push_back(std::move(term));
  }
  return out;
}

const systems::ShiftSystem& need_shift(const systems::System& system, const std::string& path) {
  const auto* s = std::get_if<systems::ShiftSystem>(&system);
  if (!s) invalid(path, "observable needs a shift system");
  return *s;
}

}  // namespace

systems::Observable parse_observable(const json& value, const systems::System& system, const std::string& path) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  std::optional<systems::Observable> f;
  if (type == "indicator") {
    const auto& s = need_shift(system, path);
    const auto symbol = r.integer("symbol");
    if (symbol < 1 || symbol > s.alphabet_size()) invalid(r.path_of("symbol"), "symbol outside 1..m");
    f = systems::indicator(s, static_cast<int>(symbol), static_cast<int>(r.integer_or("offset", 0)));
  } else if (type == "word") {
    const auto& s = need_shift(system, path);
    const auto word = parse_integers(r.required("word"), r.path_of("word"));
    if (word.empty()) invalid(r.path_of("word"), "word must be non-empty");
    std::vector<systems::Symbol> symbols;
    for (auto w : word) {
      if (w < 1 || w > s.alphabet_size()) invalid(r.path_of("word"), "symbol outside 1..m");
      symbols.push_back(static_cast<int>(w));
    }
    f = systems::word_indicator(s, symbols, static_cast<int>(r.integer_or("offset", 0)));
  } else if (type == "cylinder") {
    const auto& s = need_shift(system, path);
    const auto radius = r.integer("radius");
    if (radius < 0 || radius > 12) invalid(r.path_of("radius"), "radius must lie in [0, 12]");
    f = systems::Observable::cylinder(s.alphabet_size(), static_cast<int>(radius),
                                      parse_numbers(r.required("table"), r.path_of("table")));
  } else if (type == "constant") {
    const double v = r.number("value");
    if (const auto* s = std::get_if<systems::ShiftSystem>(&system))
      f = systems::constant(*s, v);
    else
      f = systems::Observable::trig(std::get<systems::TorusAutomorphism>(system).dimension(),
                                    {{std::vector<std::int64_t>(
                                          static_cast<std::size_t>(std::get<systems::TorusAutomorphism>(system).dimension()), 0),
                                      v, 0.0}});
  } else if (type == "character") {
    f = systems::character(parse_integers(r.required("frequency"), r.path_of("frequency")), r.number_or("cos", 1.0),
                           r.number_or("sin", 0.0));
  } else if (type == "trig") {
    if (!std::holds_alternative<systems::TorusAutomorphism>(system)) invalid(path, "trig observable needs a torus");
    f = systems::Observable::trig(std::get<systems::TorusAutomorphism>(system).dimension(),
                                  parse_terms(r.required("terms"), r.path_of("terms")));
  } else {
    invalid(r.path_of("type"), "unknown observable type \"" + type +
                                   "\" (indicator, word, cylinder, constant, character, trig)");
  }
  const bool centered = r.boolean_or("centered", false);
  const double scale = r.number_or("scale", 1.0);
  r.finish();
  systems::check_compatible(*f, system);
  systems::Observable out = scale == 1.0 ? *f : f->scaled(scale);
  if (centered) out = out.plus_constant(-systems::exact_mean(out, system));
  return out;
}

sequences::SequenceSpec parse_sequence(const json& value, const std::string& path) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  sequences::SequenceSpec out;
  if (type == "linear") {
    out = sequences::SequenceSpec::linear();
  } else if (type == "polynomial") {
    out = sequences::SequenceSpec::polynomial(parse_integers(r.required("coefficients"), r.path_of("coefficients")));
  } else if (type == "primes") {
    out = sequences::SequenceSpec::primes();
  } else if (type == "explicit") {
    const auto values = parse_integers(r.required("values"), r.path_of("values"));
    out = sequences::SequenceSpec::explicit_list(values, r.integer("multiplicity_bound"));
  } else {
    invalid(r.path_of("type"), "unknown sequence type \"" + type + "\" (linear, polynomial, primes, explicit)");
  }
  r.finish();
  return out;
}

Config parse_config(const json& raw) {
  ObjectReader r(raw, "config");
  Config c;
  c.raw = raw;
  const auto version = r.integer("schema_version");
  if (version != kSchemaVersion)
    invalid("config.schema_version", "unsupported version " + std::to_string(version) + ", expected " +
                                         std::to_string(kSchemaVersion));
  c.experiment = r.string("experiment");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
    invalid("config.experiment", "unknown experiment \"" + c.experiment + "\"");
  if (const json* seed = r.optional("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
      invalid("config.seed", "expected a non-negative integer");
    c.seed = seed->get<std::uint64_t>();
  }
  if (const json* out = r.optional("output")) {
    if (!out->is_string()) invalid("config.output", "expected a string");
    c.output = out->get<std::string>();
  }

  const bool dynamical = c.experiment != "growth" && c.experiment != "counting";
  const bool sequenced = c.experiment == "average" || c.experiment == "ratecheck" || c.experiment == "dyadic" ||
                         c.experiment == "counting";
  if (dynamical) {
    c.system = parse_system(r.required("system"), "config.system");
    const json& obs = r.required("observables");
    if (!obs.is_array() || obs.empty()) invalid("config.observables", "expected a non-empty array");
    for (std::size_t i = 0; i < obs.size(); ++i)
      c.observables.push_back(parse_observable(obs[i], *c.system, "config.observables[" + std::to_string(i) + "]"));
  } else {
    if (r.has("system")) invalid("config.system", "not used by " + c.experiment);
    if (r.has("observables")) invalid("config.observables", "not used by " + c.experiment);
  }
  if (sequenced)
    c.sequence = parse_sequence(r.required("sequence"), "config.sequence");
  else if (r.has("sequence"))
    invalid("config.sequence", "not used by " + c.experiment);
  if (const json* p = r.optional("parameters")) {
    if (!p->is_object()) invalid("config.parameters", "expected an object");
    c.parameters = *p;
  }
  r.finish();
  return c;
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, path + ": " + e.what());
  }
}

}  // namespace ergolab::cli
