// betaexp: command-line front end.
//
// Exit codes: 0 success, 2 validation failure, 3 resource cap, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "betaexp/expansion.hpp"
#include "betaexp/io.hpp"
#include "betaexp/layers.hpp"
#include "betaexp/pexp.hpp"
#include "betaexp/selftest.hpp"
#include "betaexp/stochastic.hpp"

using namespace betaexp;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;
constexpr int kExitUsage = 64;

struct RunConfig {
  int n = 2, q = 1;
  std::string tol = "1e-30";
  std::string mode = "auto";
  std::string format = "table";
  std::string output;
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

// A failed check that is not an exception (e.g. an invalid digit string).
struct ValidationFailure {};

ContextPtr context_for(const RunConfig& cfg) {
  bool exact = false;
  const mpq_class tol = io::parse_rational(cfg.tol, exact);
  return make_context(cfg.n, cfg.q, tol);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const int v = std::stoi(item, &pos);
    if (pos != item.size()) throw domain_error("malformed integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// A point of [0,1]: a rational/decimal, or beta^k (k integer), optionally
// multiplied by a rational as in "2*beta^-3".
AlgNum parse_point(const ContextPtr& ctx, const std::string& s) {
  const auto star = s.find('*');
  const std::string head = star == std::string::npos ? s : s.substr(0, star);
  const std::string tail = star == std::string::npos ? "" : s.substr(star + 1);
  bool exact = false;
  if (head.rfind("beta", 0) == 0) {
    int k = 1;
    if (head.size() > 4) {
      if (head[4] != '^') throw domain_error("malformed point '" + s + "'");
      k = std::stoi(head.substr(5));
    }
    AlgNum v = AlgNum::beta_pow(ctx, k);
    return tail.empty() ? v : v * io::parse_rational(tail, exact);
  }
  const AlgNum c(ctx, io::parse_rational(head, exact));
  return tail.empty() ? c : c * parse_point(ctx, tail);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw domain_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void emit_json(const RunConfig& cfg, const io::Meta& meta, json body) {
  Output out(cfg.output);
  json j;
  j["meta"] = io::to_json(meta);
  for (auto& [k, v] : body.items()) j[k] = v;
  out.os() << j.dump(2) << "\n";
}

std::string cplx_str(std::complex<long double> z) {
  return io::fmt(static_cast<double>(z.real())) + (z.imag() < 0 ? "-" : "+") +
         io::fmt(std::fabs(static_cast<double>(z.imag()))) + "i";
}

// ---- subcommands -------------------------------------------------------

int cmd_ctx(const RunConfig& cfg) {
  auto ctx = context_for(cfg);
  const auto rep = all_roots(*ctx);
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  if (cfg.format == "json") {
    json roots = json::array();
    for (const auto& r : rep.other_roots)
      roots.push_back({{"re", static_cast<double>(r.value.real())},
                       {"im", static_cast<double>(r.value.imag())},
                       {"modulus", static_cast<double>(std::abs(r.value))},
                       {"radius", static_cast<double>(r.radius)}});
    emit_json(cfg, meta,
              {{"beta_lo", ctx->beta_lo().get_str()},
               {"beta_hi", ctx->beta_hi().get_str()},
               {"beta_float", ctx->beta_float()},
               {"inv_beta", AlgNum::inv_beta(ctx).to_decimal(30)},
               {"other_roots", roots},
               {"annulus_lo", rep.annulus_lo},
               {"all_inside_unit_disk", rep.all_inside_unit_disk},
               {"outside_annulus", rep.outside_annulus},
               {"multiplicities_simple", rep.multiplicities_simple},
               {"pisot", rep.passed()}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") {
      os << io::csv_meta_line(meta) << "root_re,root_im,modulus,radius\n";
      for (const auto& r : rep.other_roots)
        os << io::fmt(static_cast<double>(r.value.real())) << "," << io::fmt(static_cast<double>(r.value.imag())) << ","
           << io::fmt(static_cast<double>(std::abs(r.value))) << "," << io::fmt(static_cast<double>(r.radius)) << "\n";
    } else {
      os << "n = " << ctx->n() << ", q = " << ctx->q() << "\n";
      os << "beta ~ " << io::fmt_short(ctx->beta_float()) << "\n";
      os << "beta = " << ctx->beta_decimal(30) << "\n";
      os << "P(x) = x^" << ctx->n() << " - " << ctx->q() << "(x^" << ctx->n() - 1 << " + ... + 1)\n";
      os << "other roots (modulus):";
      for (const auto& r : rep.other_roots) os << " " << io::fmt_short(static_cast<double>(std::abs(r.value)));
      os << "\nannulus lower bound: " << io::fmt_short(rep.annulus_lo) << "\n";
      os << "Pisot: " << (rep.passed() ? "yes" : "no") << "\n";
    }
  }
  return rep.passed() ? 0 : kExitValidation;
}

int cmd_expand(const RunConfig& cfg, const std::string& xs, int count) {
  auto ctx = context_for(cfg);
  bool exact_input = false;
  const mpq_class x = io::parse_rational(xs, exact_input);
  std::string mode = cfg.mode;
  if (mode == "auto") mode = exact_input ? "exact" : "float";
  if (exact_input && mode == "float") mode = "exact";
  DigitSeq d;
  std::string remainder;
  if (mode == "exact") {
    d = greedy_digits(AlgNum(ctx, x), count);
    remainder = d.tail_remainder->to_decimal(30);
  } else {
    d = greedy_digits(ctx, x.get_d(), count);
    remainder = io::fmt(d.float_remainder);
  }
  const auto meta = io::make_meta(*ctx, mode, cfg.seed);
  if (cfg.format == "json") {
    emit_json(cfg, meta, {{"x", xs}, {"digits", d.digits}, {"remainder", remainder}});
  } else if (cfg.format == "csv") {
    Output out(cfg.output);
    out.os() << io::csv_meta_line(meta) << "index,digit\n";
    for (std::size_t i = 0; i < d.digits.size(); ++i) out.os() << i + 1 << "," << d.digits[i] << "\n";
  } else {
    Output out(cfg.output);
    out.os() << join(d.digits) << "\n";
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg, const std::string& digits) {
  auto ctx = context_for(cfg);
  const auto rep = validate_digits(*ctx, parse_int_list(digits));
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  if (cfg.format == "json") {
    emit_json(cfg, meta,
              {{"status", to_string(rep.status)},
               {"restriction", rep.restriction},
               {"index", rep.index},
               {"message", rep.message}});
  } else {
    Output out(cfg.output);
    out.os() << to_string(rep.status);
    if (rep.status != Validity::Valid)
      out.os() << " (restriction " << rep.restriction << " at index " << rep.index << "): " << rep.message;
    out.os() << "\n";
  }
  return rep.ok() ? 0 : kExitValidation;
}

int cmd_classify(const RunConfig& cfg, const std::string& pre, const std::string& per) {
  auto ctx = context_for(cfg);
  const auto r = classify_representation(ctx, parse_int_list(pre), parse_int_list(per));
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  if (cfg.format == "json") {
    json body{{"case", to_string(r.kind)}, {"value", r.value.to_decimal(30)}};
    if (r.k) body["k"] = *r.k;
    if (r.greedy) body["greedy"] = *r.greedy;
    emit_json(cfg, meta, body);
  } else {
    Output out(cfg.output);
    out.os() << to_string(r.kind);
    if (r.k) out.os() << " k=" << *r.k << " greedy=(" << join(*r.greedy) << ")";
    out.os() << " value=" << r.value.to_decimal(30) << "\n";
  }
  return 0;
}

int cmd_density(const RunConfig& cfg) {
  auto ctx = context_for(cfg);
  const auto d = invariant_density(ctx);
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  const auto& u = d.u1;
  if (cfg.format == "json") {
    json cells = json::array();
    for (std::size_t i = 0; i < u.cells(); ++i)
      cells.push_back({{"left", u.breakpoints()[i].to_decimal(30)},
                       {"right", u.breakpoints()[i + 1].to_decimal(30)},
                       {"value", u.values()[i].to_decimal(30)}});
    emit_json(cfg, meta,
              {{"cells", cells}, {"fixed_point", d.fixed_point}, {"unit_mass", d.unit_mass}, {"positive", d.positive}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") os << io::csv_meta_line(meta) << "left,value\n";
    for (std::size_t i = 0; i < u.cells(); ++i) {
      if (cfg.format == "csv")
        os << io::fmt(u.breakpoints()[i].to_double()) << "," << io::fmt(u.values()[i].to_double()) << "\n";
      else
        os << "[" << u.breakpoints()[i].to_decimal(17) << ", " << u.breakpoints()[i + 1].to_decimal(17)
           << ")  u1 = " << u.values()[i].to_decimal(17) << "\n";
    }
    if (cfg.format != "csv")
      os << "P u1 = u1: " << (d.fixed_point ? "exact" : "FAILED") << ", integral 1: " << (d.unit_mass ? "exact" : "FAILED")
         << "\n";
  }
  return d.fixed_point && d.unit_mass && d.positive ? 0 : kExitValidation;
}

int cmd_spectrum(const RunConfig& cfg) {
  auto ctx = context_for(cfg);
  const auto T = transfer_matrix(ctx);
  const auto sd = spectral_data(ctx, 1e-12, cfg.seed ? cfg.seed : 0x5eed);
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  const bool ok = sd.window_ok && sd.column_sums_one && sd.det_identity_residual <= 1e-10;
  if (cfg.format == "json") {
    json mat = json::array(), eig = json::array();
    for (const auto& row : T.entries) {
      json r = json::array();
      for (const auto& v : row) r.push_back(v.to_decimal(30));
      mat.push_back(r);
    }
    for (const auto& e : sd.eigenvalues)
      eig.push_back({{"re", static_cast<double>(e.real())}, {"im", static_cast<double>(e.imag())}});
    emit_json(cfg, meta,
              {{"matrix", mat},
               {"eigenvalues", eig},
               {"lambda2_mod", sd.lambda2_mod},
               {"window_lo", sd.window_lo},
               {"window_hi", sd.window_hi},
               {"window_ok", sd.window_ok},
               {"K2", sd.K2},
               {"det_identity_residual", sd.det_identity_residual},
               {"column_sums_one", sd.column_sums_one}});
  } else if (cfg.format == "csv") {
    Output out(cfg.output);
    out.os() << io::csv_meta_line(meta) << "index,re,im,modulus\n";
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i)
      out.os() << i + 1 << "," << io::fmt(static_cast<double>(sd.eigenvalues[i].real())) << ","
               << io::fmt(static_cast<double>(sd.eigenvalues[i].imag())) << ","
               << io::fmt(static_cast<double>(std::abs(sd.eigenvalues[i]))) << "\n";
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    os << "transfer matrix on span{F_0..F_" << ctx->n() - 1 << "}:\n";
    for (const auto& row : T.entries) {
      for (const auto& v : row) os << "  " << v.to_decimal(12);
      os << "\n";
    }
    os << "eigenvalues:";
    for (const auto& e : sd.eigenvalues) os << " " << cplx_str(e);
    os << "\n|lambda2| = " << io::fmt(sd.lambda2_mod) << "  window [" << io::fmt(sd.window_lo) << ", "
       << io::fmt(sd.window_hi) << ")  " << (sd.window_ok ? "ok" : "VIOLATED") << "\n";
    os << "K2 = " << io::fmt(sd.K2) << "\n";
    os << "det identity residual = " << io::fmt(sd.det_identity_residual) << "\n";
  }
  return ok ? 0 : kExitValidation;
}

int cmd_partition(const RunConfig& cfg, int M, std::size_t cap) {
  auto ctx = context_for(cfg);
  const auto leaves = partition_leaves(ctx, M, cap);
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  AlgNum total(ctx, 0L);
  for (const auto& l : leaves) total += AlgNum::beta_pow(ctx, -l.weight);
  const bool tiles = total == AlgNum(ctx, 1L);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& l : leaves)
      arr.push_back({{"k", l.index.k}, {"j", l.index.j}, {"weight", l.weight}, {"left", l.left.to_double()}});
    emit_json(cfg, meta, {{"M", M}, {"leaves", leaves.size()}, {"widths_sum_to_one", tiles}, {"partition", arr}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") {
      os << io::csv_meta_line(meta) << "k,j,weight,left,width\n";
      for (const auto& l : leaves)
        os << "\"" << join(l.index.k) << "\",\"" << join(l.index.j) << "\"," << l.weight << "," << io::fmt(l.left.to_double())
           << "," << io::fmt(std::pow(ctx->beta_float(), -l.weight)) << "\n";
    } else {
      os << leaves.size() << " leaves for M = " << M << "; widths sum to 1: " << (tiles ? "exactly" : "NO") << "\n";
      const std::size_t show = std::min<std::size_t>(leaves.size(), 20);
      for (std::size_t i = 0; i < show; ++i)
        os << "  k=(" << join(leaves[i].index.k) << ") j=(" << join(leaves[i].index.j) << ") weight " << leaves[i].weight
           << " left " << io::fmt(leaves[i].left.to_double()) << "\n";
      if (show < leaves.size()) os << "  ... (" << leaves.size() - show << " more; use --format csv)\n";
    }
  }
  return tiles ? 0 : kExitValidation;
}

struct TestFunction {
  std::function<AlgNum(const AlgNum&)> exact;
  mpq_class integral;
};

TestFunction test_function(const std::string& name) {
  if (name == "x") return {[](const AlgNum& x) { return x; }, mpq_class(1, 2)};
  if (name == "x2") return {[](const AlgNum& x) { return x * x; }, mpq_class(1, 3)};
  if (name == "sin")
    return {[](const AlgNum& x) { return AlgNum(x.context().ptr(), mpq_class(std::sin(x.to_double()))); },
            mpq_class(1 - std::cos(1.0))};
  throw domain_error("unknown function '" + name + "' (choose x, x2 or sin)");
}

int cmd_iterate(const RunConfig& cfg, int M, int N, const std::string& fname, std::size_t bit_cap) {
  auto ctx = context_for(cfg);
  const auto tf = test_function(fname);
  const auto f = approximate_lipschitz(ctx, tf.exact, M);
  const auto rep = iterate_transfer(f, N, AlgNum(ctx, tf.integral), bit_cap);
  const auto meta = io::make_meta(*ctx, rep.mode, cfg.seed);
  const double beta = ctx->beta_float();
  if (cfg.format == "json") {
    json errs = json::array();
    for (auto [k, e] : rep.errors) errs.push_back({{"N", k}, {"l1_error", e}, {"envelope", rep.K1_fitted * std::pow(beta, -rep.K2 * k)}});
    emit_json(cfg, meta,
              {{"function", fname},
               {"M", M},
               {"cells", f.cells()},
               {"fitted_rate", rep.fitted_rate},
               {"fit_range", {rep.fit_begin, rep.fit_end - 1}},
               {"K1_fitted", rep.K1_fitted},
               {"K2", rep.K2},
               {"lambda2_mod", rep.lambda2_mod},
               {"floor", rep.floor},
               {"plateau", rep.plateau_level},
               {"fallback_at", rep.fallback_at},
               {"errors", errs}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") os << io::csv_meta_line(meta) << "N,l1_error,envelope\n";
    else
      os << "f = " << fname << ", M = " << M << " (" << f.cells() << " cells), mode " << rep.mode << "\n"
         << "N  l1_error  envelope\n";
    for (auto [k, e] : rep.errors)
      os << k << (cfg.format == "csv" ? "," : "  ") << io::fmt(e) << (cfg.format == "csv" ? "," : "  ")
         << io::fmt(rep.K1_fitted * std::pow(beta, -rep.K2 * k)) << "\n";
    if (cfg.format != "csv")
      os << "fitted rate " << io::fmt(rep.fitted_rate) << " over N=" << rep.fit_begin << ".." << rep.fit_end - 1
         << "; ln|lambda2| = " << io::fmt(std::log(rep.lambda2_mod)) << "; K2 = " << io::fmt(rep.K2)
         << "; K1 = " << io::fmt(rep.K1_fitted) << "\n";
  }
  return 0;
}

int cmd_eigen(const RunConfig& cfg, const std::string& zs, int trunc, std::size_t samples, std::size_t cap) {
  auto ctx = context_for(cfg);
  const auto parts = [&] {
    std::vector<double> v;
    std::stringstream ss(zs);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.empty() || v.size() > 2) throw domain_error("--z expects re or re,im");
    return v;
  }();
  const cplx z(parts[0], parts.size() > 1 ? parts[1] : 0.0);
  const auto r = psi_z(ctx, z, trunc, cap);
  const auto meta = io::make_meta(*ctx, r.mode, cfg.seed);
  if (cfg.format == "json") {
    emit_json(cfg, meta,
              {{"z", {z.real(), z.imag()}},
               {"M_trunc", trunc},
               {"residual_l2", r.residual_l2},
               {"residual_bound", r.residual_bound},
               {"isometry_defect", r.isometry_defect},
               {"pieces", r.pieces},
               {"eigen_mode", r.mode}});
  } else if (cfg.format == "csv") {
    if (!r.psi) throw resource_error("psi_z exceeded the piece cap; only the grid residual is available (use --format json)");
    Output out(cfg.output);
    out.os() << io::csv_meta_line(meta) << "t,re,im\n";
    for (auto [t, v] : sample(*r.psi, samples)) out.os() << io::fmt(t) << "," << io::fmt(v.real()) << "," << io::fmt(v.imag()) << "\n";
  } else {
    Output out(cfg.output);
    out.os() << "z = " << io::fmt(z.real()) << (z.imag() < 0 ? "" : "+") << io::fmt(z.imag()) << "i, M = " << trunc
             << ", mode " << r.mode << "\n"
             << "||P psi_z - z psi_z||_2 = " << io::fmt(r.residual_l2) << "\n"
             << "|z|^(M+1) ||u^1/2 W^M u^-1/2 psi0||_2 = " << io::fmt(r.residual_bound) << "\n"
             << "isometry defect = " << io::fmt(r.isometry_defect) << ", pieces = " << r.pieces << "\n";
  }
  return 0;
}

int cmd_psi0(const RunConfig& cfg, std::size_t samples) {
  auto ctx = context_for(cfg);
  const auto p = psi0(ctx);
  const double res = norm2(pexp_transfer(p));
  const auto meta = io::make_meta(*ctx, "float", cfg.seed);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& pc : p.pieces())
      arr.push_back({{"a", pc.a}, {"b", pc.b}, {"amp_re", pc.amp.real()}, {"amp_im", pc.amp.imag()}, {"freq", pc.freq}});
    emit_json(cfg, meta, {{"pieces", arr}, {"transfer_l2", res}});
  } else if (cfg.format == "csv") {
    Output out(cfg.output);
    out.os() << io::csv_meta_line(meta) << "t,re,im\n";
    for (auto [t, v] : sample(p, samples)) out.os() << io::fmt(t) << "," << io::fmt(v.real()) << "," << io::fmt(v.imag()) << "\n";
  } else {
    Output out(cfg.output);
    for (const auto& pc : p.pieces())
      out.os() << "[" << io::fmt(pc.a) << ", " << io::fmt(pc.b) << ")  exp(i " << io::fmt(pc.freq) << " t)\n";
    out.os() << "||P psi0||_2 = " << io::fmt(res) << "\n";
  }
  return res <= 1e-12 ? 0 : kExitValidation;
}

int cmd_correlate(const RunConfig& cfg, const std::string& gs, int max_lag) {
  auto ctx = context_for(cfg);
  const auto comma = gs.find(',');
  if (comma == std::string::npos) throw domain_error("--g expects a,b (indicator of [a,b))");
  const auto g = ExactPC::indicator(ctx, parse_point(ctx, gs.substr(0, comma)), parse_point(ctx, gs.substr(comma + 1)),
                                    AlgNum(ctx, 1L));
  const auto rep = correlation_exact(g, max_lag);
  const auto meta = io::make_meta(*ctx, "exact", cfg.seed);
  if (cfg.format == "json") {
    json lags = json::array();
    for (const auto& l : rep.lags) lags.push_back({{"lag", l.lag}, {"covariance", l.covariance.to_double()}, {"bound", l.bound}});
    emit_json(cfg, meta,
              {{"g", gs},
               {"mean", rep.mean.to_decimal(30)},
               {"method", rep.method},
               {"K1_fitted", rep.K1_fitted},
               {"K2", rep.K2},
               {"lambda2_mod", rep.lambda2_mod},
               {"within_bound", rep.within_bound()},
               {"lags", lags}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") os << io::csv_meta_line(meta) << "lag,covariance,bound\n";
    else os << "mean = " << rep.mean.to_decimal(30) << "\nlag  covariance  bound\n";
    for (const auto& l : rep.lags)
      os << l.lag << (cfg.format == "csv" ? "," : "  ") << io::fmt(l.covariance.to_double())
         << (cfg.format == "csv" ? "," : "  ") << io::fmt(l.bound) << "\n";
  }
  return rep.within_bound() ? 0 : kExitValidation;
}

int cmd_ergodic(const RunConfig& cfg, const std::vector<int>& Ns, std::size_t starts, const std::string& fname) {
  auto ctx = context_for(cfg);
  const auto u1 = invariant_density(ctx).u1;
  std::function<double(double)> g;
  AlgNum mean(ctx, 0L);
  if (fname == "x") {
    g = [](double x) { return x; };
    mean = first_moment(u1);
  } else if (fname == "chi") {
    const double b = 1 / ctx->beta_float();
    g = [b](double x) { return x < b ? 1.0 : 0.0; };
    mean = integrate(multiply(u1, ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum::inv_beta(ctx), AlgNum(ctx, 1L))));
  } else {
    throw domain_error("unknown function '" + fname + "' (choose x or chi)");
  }
  std::vector<ErgodicReport> reps;
  for (int N : Ns) reps.push_back(ergodic_average(ctx, g, mean.to_double(), cfg.seed, starts, N, cfg.threads));
  // the orbit of 1/2 is periodic for the golden base: an exceptional point
  const auto meta = io::make_meta(*ctx, "float", cfg.seed);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : reps)
      arr.push_back({{"N", r.N}, {"bias", r.bias}, {"variance", r.variance}, {"var_times_N", r.var_times_N()}});
    emit_json(cfg, meta, {{"g", fname}, {"mean", mean.to_decimal(30)}, {"starts", starts}, {"averages", arr}});
  } else {
    Output out(cfg.output);
    auto& os = out.os();
    if (cfg.format == "csv") os << io::csv_meta_line(meta) << "N,bias,variance,var_times_N\n";
    else os << "M = " << mean.to_decimal(30) << ", " << starts << " starts from u1\nN  bias  variance  var*N\n";
    const char* sep = cfg.format == "csv" ? "," : "  ";
    for (const auto& r : reps)
      os << r.N << sep << io::fmt(r.bias) << sep << io::fmt(r.variance) << sep << io::fmt(r.var_times_N()) << "\n";
  }
  return 0;
}

int cmd_selftest(const RunConfig& cfg, bool as_json, const std::vector<int>& only) {
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= selftest::kCriteria; ++i) ids.push_back(i);
  json arr = json::array();
  int failed = 0;
  Output out(cfg.output);
  for (int id : ids) {
    const auto r = selftest::run(id, cfg.threads);
    failed += !r.passed;
    if (as_json)
      arr.push_back({{"criterion", r.id},
                     {"name", r.name},
                     {"passed", r.passed},
                     {"detail", r.detail},
                     {"seconds", r.seconds},
                     {"budget_seconds", r.budget_seconds}});
    else
      out.os() << selftest::format_line(r) << std::endl;
  }
  if (as_json) {
    json j;
    j["version"] = io::kVersion;
    j["passed"] = failed == 0;
    j["failed"] = failed;
    j["criteria"] = arr;
    out.os() << j.dump(2) << "\n";
  } else {
    out.os() << (ids.size() - static_cast<std::size_t>(failed)) << "/" << ids.size() << " criteria passed\n";
  }
  return failed == 0 ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"betaexp: greedy beta-expansions, transfer operators and their spectra"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "degree n >= 2")->capture_default_str();
    sub->add_option("--q", cfg.q, "digit bound q >= 1")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "width of the beta enclosure (rational or decimal)")->capture_default_str();
    sub->add_option("--mode", cfg.mode, "exact | float | auto")
        ->check(CLI::IsMember({"exact", "float", "auto"}))
        ->capture_default_str();
    sub->add_option("--format", cfg.format, "table | csv | json")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    sub->add_option("-o,--output", cfg.output, "write to a file instead of stdout");
    sub->add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads for sampling");
  };

  auto* c_ctx = app.add_subcommand("ctx", "beta and its Pisot report");
  common(c_ctx);

  std::string x;
  int ndigits = 20;
  auto* c_expand = app.add_subcommand("expand", "greedy digits of x");
  common(c_expand);
  c_expand->add_option("--x", x, "point in [0,1): p/q or decimal")->required();
  c_expand->add_option("--digits", ndigits, "number of digits")->capture_default_str()->check(CLI::PositiveNumber);

  std::string digits;
  auto* c_validate = app.add_subcommand("validate", "check a digit string against the admissibility restrictions");
  common(c_validate);
  c_validate->add_option("--digits", digits, "comma-separated digits")->required();

  std::string pre, per;
  auto* c_classify = app.add_subcommand("classify", "classify an eventually periodic representation");
  common(c_classify);
  c_classify->add_option("--pre", pre, "preamble digits, comma separated");
  c_classify->add_option("--period", per, "period digits, comma separated");

  auto* c_density = app.add_subcommand("density", "invariant density u1");
  common(c_density);

  auto* c_spectrum = app.add_subcommand("spectrum", "transfer matrix, eigenvalues, lambda2 window and K2");
  common(c_spectrum);

  int M = 10, N = 40;
  std::size_t cap = 20'000'000;
  auto* c_partition = app.add_subcommand("partition", "adaptive layer partition");
  common(c_partition);
  c_partition->add_option("--M", M, "refinement depth")->capture_default_str();
  c_partition->add_option("--cap", cap, "maximum number of leaves")->capture_default_str();

  std::string fname = "x";
  std::size_t bit_cap = 10000;
  auto* c_iterate = app.add_subcommand("iterate", "L1 decay of P^N f towards u1 * integral(f)");
  common(c_iterate);
  c_iterate->add_option("--M", M, "approximation depth")->capture_default_str();
  c_iterate->add_option("--N", N, "number of iterations")->capture_default_str();
  c_iterate->add_option("--f", fname, "x | x2 | sin")->capture_default_str();
  c_iterate->add_option("--bit-cap", bit_cap, "switch to 256-bit floats beyond this coefficient size")->capture_default_str();

  std::string zs = "0.5";
  int trunc = 12;
  std::size_t samples = 1024, piece_cap = kPieceCap;
  auto* c_eigen = app.add_subcommand("eigen", "truncated eigenfunction psi_z");
  common(c_eigen);
  c_eigen->add_option("--z", zs, "re or re,im with |z| < 1")->capture_default_str();
  c_eigen->add_option("--trunc", trunc, "truncation M")->capture_default_str();
  c_eigen->add_option("--samples", samples, "CSV sampling points")->capture_default_str();
  c_eigen->add_option("--piece-cap", piece_cap, "piece budget before grid mode")->capture_default_str();

  auto* c_psi0 = app.add_subcommand("psi0", "eigenfunction for the eigenvalue 0");
  common(c_psi0);
  c_psi0->add_option("--samples", samples, "CSV sampling points")->capture_default_str();

  std::string gs = "0,beta^-1";
  int max_lag = 40;
  auto* c_corr = app.add_subcommand("correlate", "exact covariances of an indicator observable");
  common(c_corr);
  c_corr->add_option("--g", gs, "a,b for the indicator of [a,b); points as p/q, beta^k or r*beta^k")->capture_default_str();
  c_corr->add_option("--max-lag", max_lag, "largest lag")->capture_default_str();

  std::string Ns = "100,1000,10000";
  std::size_t starts = 1000;
  std::string gname = "x";
  auto* c_erg = app.add_subcommand("ergodic", "Monte-Carlo ergodic averages");
  common(c_erg);
  c_erg->add_option("--N", Ns, "orbit lengths, comma separated")->capture_default_str();
  c_erg->add_option("--starts", starts, "starting points drawn from u1")->capture_default_str();
  c_erg->add_option("--g", gname, "x | chi")->capture_default_str();

  bool as_json = false;
  std::string only;
  auto* c_self = app.add_subcommand("selftest", "run the acceptance suite");
  common(c_self);
  c_self->add_flag("--json", as_json, "machine-readable manifest");
  c_self->add_option("--criteria", only, "comma-separated subset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*c_ctx) return cmd_ctx(cfg);
    if (*c_expand) return cmd_expand(cfg, x, ndigits);
    if (*c_validate) return cmd_validate(cfg, digits);
    if (*c_classify) return cmd_classify(cfg, pre, per);
    if (*c_density) return cmd_density(cfg);
    if (*c_spectrum) return cmd_spectrum(cfg);
    if (*c_partition) return cmd_partition(cfg, M, cap);
    if (*c_iterate) return cmd_iterate(cfg, M, N, fname, bit_cap);
    if (*c_eigen) return cmd_eigen(cfg, zs, trunc, samples, piece_cap);
    if (*c_psi0) return cmd_psi0(cfg, samples);
    if (*c_corr) return cmd_correlate(cfg, gs, max_lag);
    if (*c_erg) return cmd_ergodic(cfg, parse_int_list(Ns), starts, gname);
    if (*c_self) return cmd_selftest(cfg, as_json, parse_int_list(only));
  } catch (const resource_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed argument (" << e.what() << ")\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
