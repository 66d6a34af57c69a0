#include "ltsmile/calib.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ltsmile/pricer.hpp"
#include "ltsmile/smile.hpp"

namespace ltsmile {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Implied variance of the BG large-time smile with the tangency points cached.
class BGSmile {
 public:
  explicit BGSmile(const BGParams& p) : model_(p), tp_(tangency_points(model_)) {}
  double variance(double x) const { return variance_from_omega(omega(model_, x), x, tp_.inside(x)); }
  double total_variance(double k, double T) const { return T * variance(k / T); }

 private:
  ModelSpec model_;
  TangencyPoints tp_;
};

BGParams from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
std::array<double, 4> to_array(const BGParams& p) { return {p.alpha_p, p.alpha_m, p.lambda_p, p.lambda_m}; }

double vega_weight(double k, double w) {
  const double s = std::sqrt(w);
  const double d1 = -k / s + 0.5 * s;
  return std::exp(-0.5 * d1 * d1);
}

struct FitContext {
  const OptionChainSlice* slice;
  std::array<double, 4> lo;
  std::array<double, 4> hi;

  std::array<double, 4> map(const gsl_vector* y) const {
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i)
      p[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (1.0 + std::sin(gsl_vector_get(y, i)));
    return p;
  }
  double unmap(std::size_t i, double p) const {
    const double t = std::clamp((p - lo[i]) / (hi[i] - lo[i]), 1e-6, 1.0 - 1e-6);
    return std::asin(2.0 * t - 1.0);
  }
};

double fit_objective(const gsl_vector* y, void* params) {
  const auto* ctx = static_cast<const FitContext*>(params);
  try {
    const double f = bgi_objective(from_array(ctx->map(y)), *ctx->slice);
    return std::isfinite(f) ? f : 1e300;
  } catch (const Error&) {
    return 1e300;
  }
}

struct FitResult {
  std::array<double, 4> p;
  double residual;
  bool converged;
};

enum class RunStatus { Converged, Stalled, Exhausted };

struct Run {
  std::array<double, 4> y;
  double f;
  RunStatus status;
};

Run simplex_run(gsl_multimin_function& fn, const std::array<double, 4>& y0, int max_iter, double size_tol) {
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(4), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(4), &gsl_vector_free);
  for (std::size_t i = 0; i < 4; ++i) gsl_vector_set(x.get(), i, y0[i]);
  gsl_vector_set_all(step.get(), 0.25);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4), &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

  constexpr int kWindow = 500;
  RunStatus status = RunStatus::Exhausted;
  double f_mark = gsl_multimin_fminimizer_minimum(s.get());
  for (int it = 1; it <= max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) {
      status = RunStatus::Stalled;
      break;
    }
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol) == GSL_SUCCESS) {
      status = RunStatus::Converged;
      break;
    }
    if (it % kWindow == 0) {
      const double f = gsl_multimin_fminimizer_minimum(s.get());
      if (!(f < f_mark - 1e-12 * std::abs(f_mark))) {
        status = RunStatus::Stalled;
        break;
      }
      f_mark = f;
    }
  }
  Run r{{}, gsl_multimin_fminimizer_minimum(s.get()), status};
  for (std::size_t i = 0; i < 4; ++i) r.y[i] = gsl_vector_get(gsl_multimin_fminimizer_x(s.get()), i);
  return r;
}

// A stalled simplex is restarted from its best vertex; a restart that cannot lower f marks a
// stationary point.
FitResult minimize_from(const FitContext& ctx, const std::array<double, 4>& start, const CalibrationOptions& opts) {
  gsl_multimin_function fn{&fit_objective, 4, const_cast<FitContext*>(&ctx)};
  std::array<double, 4> y{};
  for (std::size_t i = 0; i < 4; ++i) y[i] = ctx.unmap(i, start[i]);
  Run r = simplex_run(fn, y, opts.max_iter, opts.size_tol);
  bool converged = r.status == RunStatus::Converged;
  for (int restart = 0; restart < 5 && r.status == RunStatus::Stalled; ++restart) {
    const Run next = simplex_run(fn, r.y, opts.max_iter, opts.size_tol);
    const bool improved = next.f < r.f - 1e-12 * std::abs(r.f);
    if (next.f <= r.f) r = next;
    converged = r.status == RunStatus::Converged || !improved;
    if (!improved) break;
  }
  gsl_vector_const_view yv = gsl_vector_const_view_array(r.y.data(), 4);
  return {ctx.map(&yv.vector), r.f, converged && r.f < kSmilePenalty};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_number(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("chain csv line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

void finish_slice(OptionChainSlice& sl, std::vector<std::string>& warnings) {
  std::stable_sort(sl.quotes.begin(), sl.quotes.end(),
                   [](const OptionQuote& a, const OptionQuote& b) { return a.strike < b.strike; });
  std::vector<OptionQuote> unique;
  for (const auto& q : sl.quotes) {
    if (!unique.empty() && unique.back().strike == q.strike) {
      std::ostringstream os;
      os << "T=" << sl.expiry_T << ": duplicate strike " << q.strike << " dropped";
      warnings.push_back(os.str());
      continue;
    }
    unique.push_back(q);
  }
  sl.quotes = std::move(unique);
}

double call_vol(double call_norm, double k, double T) { return implied_vol_bs(call_norm, k, T); }

}  // namespace

void OptionChainSlice::validate(std::size_t min_quotes) const {
  if (!(expiry_T > 0.0)) throw DomainError("OptionChainSlice: expiry must be positive");
  if (!(forward > 0.0)) throw DomainError("OptionChainSlice: forward must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) throw DomainError("OptionChainSlice: discount must lie in (0, 1]");
  if (quotes.size() < min_quotes) throw InsufficientData("OptionChainSlice: too few quotes");
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const auto& q = quotes[i];
    if (!(q.strike > 0.0)) throw DomainError("OptionQuote: strike must be positive");
    if (!(q.bid_vol > 0.0 && q.bid_vol <= q.ask_vol)) throw DomainError("OptionQuote: need 0 < bid_vol <= ask_vol");
    if (i > 0 && !(q.strike > quotes[i - 1].strike)) throw DomainError("OptionChainSlice: strikes must increase");
  }
}

ForwardFit impute_forward(std::span<const PriceQuote> calls, std::span<const PriceQuote> puts) {
  std::vector<double> K;
  std::vector<double> y;
  for (const auto& c : calls) {
    for (const auto& p : puts) {
      if (std::abs(c.strike - p.strike) <= 1e-12 * std::max(1.0, std::abs(c.strike))) {
        K.push_back(c.strike);
        y.push_back(c.mid() - p.mid());
        break;
      }
    }
  }
  const std::size_t n = K.size();
  if (n < 3) throw InsufficientData("impute_forward: need at least 3 strikes quoted as both call and put");
  double mk = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mk += K[i];
    my += y[i];
  }
  mk /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (K[i] - mk) * (K[i] - mk);
    sxy += (K[i] - mk) * (y[i] - my);
  }
  if (!(sxx > 1e-14 * mk * mk * static_cast<double>(n))) throw DegenerateRegression("impute_forward: strikes coincide");
  const double slope = sxy / sxx;
  const double df = -slope;
  if (!(df > 0.0 && df <= 1.1)) throw DegenerateRegression("impute_forward: implied discount outside (0, 1.1]");
  const double intercept = my - slope * mk;
  const double fwd = intercept / df;
  if (!(fwd > 0.0)) throw DegenerateRegression("impute_forward: implied forward not positive");
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + slope * K[i]);
    ss += r * r;
  }
  return {fwd, df, std::sqrt(ss / static_cast<double>(n))};
}

BGIBounds default_bgi_bounds() {
  constexpr double eps = 1e-6;
  return {{eps, eps, 1.0 + eps, eps}, {1000.0, 1000.0, 1000.0, 1000.0}};
}

double bgi_vol(const BGParams& params, double k, double T) {
  const BGSmile smile(params);
  return std::sqrt(smile.variance(k / T));
}

double bgi_objective(const BGParams& params, const OptionChainSlice& slice) {
  const double T = slice.expiry_T;
  std::unique_ptr<BGSmile> smile;
  try {
    smile = std::make_unique<BGSmile>(params);
  } catch (const Error&) {
    return kSmilePenalty * static_cast<double>(slice.quotes.size());
  }
  double total = 0.0;
  for (const auto& q : slice.quotes) {
    const double k = std::log(q.strike / slice.forward);
    const double mid = 0.5 * (q.bid_vol + q.ask_vol);
    const double w0 = vega_weight(k, mid * mid * T);
    double sig = kNaN;
    try {
      sig = std::sqrt(smile->variance(k / T));
    } catch (const Error&) {
    }
    if (!std::isfinite(sig)) {
      total += kSmilePenalty;
      continue;
    }
    const double db = sig - q.bid_vol;
    const double da = q.ask_vol - sig;
    total += w0 * (db * db + da * da);
  }
  return total;
}

bool CalibrationReport::all_butterfly_ok() const {
  return std::all_of(butterfly_ok.begin(), butterfly_ok.end(), [](bool b) { return b; });
}

bool CalibrationReport::all_calendar_ok() const {
  return std::all_of(calendar_ok.begin(), calendar_ok.end(), [](bool b) { return b; });
}

TotalVarianceFn bgi_total_variance(const BGISlice& slice) {
  auto smile = std::make_shared<BGSmile>(slice.params);
  const double T = slice.T;
  return [smile, T](double k) { return smile->total_variance(k, T); };
}

double implied_density(const TotalVarianceFn& w_fn, double k) {
  constexpr double h = 1e-4;
  const double w = w_fn(k);
  const double wu = w_fn(k + h);
  const double wd = w_fn(k - h);
  const double w1 = (wu - wd) / (2.0 * h);
  const double w2 = (wu - 2.0 * w + wd) / (h * h);
  const double a = 1.0 - k * w1 / (2.0 * w);
  const double g = a * a - 0.25 * w1 * w1 * (1.0 / w + 0.25) + 0.5 * w2;
  const double d2 = -k / std::sqrt(w) - 0.5 * std::sqrt(w);
  return g * std::exp(-0.5 * d2 * d2) / std::sqrt(2.0 * std::numbers::pi * w);
}

double min_density(const TotalVarianceFn& w_fn, double k_min, double k_max, double k_step) {
  const auto n = static_cast<long>(std::floor((k_max - k_min) / k_step + 1e-9));
  double m = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= n; ++i) m = std::min(m, implied_density(w_fn, k_min + k_step * static_cast<double>(i)));
  return m;
}

CalendarResult calendar_check(std::span<const BGISlice> slices, std::span<const double> k_grid) {
  CalendarResult r{true, kNaN, {}};
  if (slices.size() < 2) return r;
  double gmin = std::numeric_limits<double>::infinity();
  auto prev = bgi_total_variance(slices[0]);
  for (std::size_t i = 1; i < slices.size(); ++i) {
    auto cur = bgi_total_variance(slices[i]);
    double m = std::numeric_limits<double>::infinity();
    for (double k : k_grid) m = std::min(m, cur(k) - prev(k));
    r.pair_ok.push_back(m >= -1e-10);
    gmin = std::min(gmin, m);
    prev = std::move(cur);
  }
  r.min_gap = gmin;
  r.ok = gmin >= -1e-10;
  return r;
}

CalibrationReport calibrate_surface(std::span<const OptionChainSlice> chain, const BGParams& guess,
                                    const BGIBounds& bounds, const CalibrationOptions& opts) {
  if (chain.empty()) throw InsufficientData("calibrate_surface: empty chain");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    chain[i].validate();
    if (i > 0 && !(chain[i].expiry_T > chain[i - 1].expiry_T))
      throw DomainError("calibrate_surface: slices must be strictly increasing in T");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(bounds.lo[i] > 0.0 && bounds.lo[i] < bounds.hi[i])) throw DomainError("calibrate_surface: bad bounds");
  }
  if (!(bounds.lo[2] > 1.0)) throw DomainError("calibrate_surface: lambda_p lower bound must exceed 1");

  CalibrationReport rep;
  rep.slices.reserve(chain.size());
  std::mt19937_64 rng(opts.seed);
  std::lognormal_distribution<double> jitter(0.0, 0.25);
  const BGISlice* anchor = nullptr;
  for (const auto& sl : chain) {
    FitContext ctx{&sl, bounds.lo, bounds.hi};
    std::array<double, 4> start = to_array(guess);
    if (anchor != nullptr) {
      const auto a = to_array(anchor->params);
      for (std::size_t i = 0; i < 2; ++i) ctx.lo[i] = std::max(ctx.lo[i], anchor->T * a[i] / sl.expiry_T);
      for (std::size_t i = 2; i < 4; ++i) ctx.hi[i] = std::min(ctx.hi[i], a[i]);
      start = a;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(ctx.lo[i] < ctx.hi[i])) ctx.hi[i] = ctx.lo[i] * (1.0 + 1e-12) + 1e-300;
    }

    FitResult best{{}, std::numeric_limits<double>::infinity(), false};
    for (int s = 0; s < std::max(1, opts.starts); ++s) {
      std::array<double, 4> x0 = start;
      if (s > 0) {
        for (auto& v : x0) v *= jitter(rng);
      }
      const auto r = minimize_from(ctx, x0, opts);
      if (r.residual < best.residual) best = r;
    }

    bool active = false;
    for (std::size_t i = 0; i < 4; ++i) {
      const double tol = 1e-6 * (ctx.hi[i] - ctx.lo[i]);
      if (best.p[i] - ctx.lo[i] <= tol || ctx.hi[i] - best.p[i] <= tol) active = true;
    }
    rep.slices.push_back({sl.expiry_T, from_array(best.p), best.residual, best.converged, active});
    if (best.converged) anchor = &rep.slices.back();
  }

  rep.min_density = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.slices) {
    double m = kNaN;
    try {
      m = min_density(bgi_total_variance(s), opts.density_k_min, opts.density_k_max, opts.k_step);
    } catch (const Error&) {
    }
    rep.butterfly_ok.push_back(m >= 0.0);
    rep.min_density = std::isnan(m) ? kNaN : std::min(rep.min_density, m);
  }

  std::vector<double> kg;
  const auto n = static_cast<long>(std::floor((opts.calendar_k_max - opts.calendar_k_min) / opts.k_step + 1e-9));
  for (long i = 0; i <= n; ++i) kg.push_back(opts.calendar_k_min + opts.k_step * static_cast<double>(i));
  const auto cal = calendar_check(rep.slices, kg);
  rep.calendar_ok = cal.pair_ok;
  rep.min_w_gap = cal.min_gap;
  return rep;
}

ChainParse read_chain_csv(std::istream& in) {
  ChainParse out;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  bool price_form = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) return out;
  const auto header = split_csv(line);
  for (std::size_t i = 0; i < header.size(); ++i) col[lower(header[i])] = i;
  auto has = [&](const char* c) { return col.count(c) > 0; };
  if (has("expiry") && has("forward") && has("strike") && has("bidvol") && has("askvol")) {
    price_form = false;
  } else if (has("expiry") && has("type") && has("strike") && has("bidpx") && has("askpx")) {
    price_form = true;
  } else {
    throw DomainError("chain csv: unrecognized header '" + trim(line) + "'");
  }

  struct PriceSide {
    std::vector<PriceQuote> calls;
    std::vector<PriceQuote> puts;
  };
  std::map<double, OptionChainSlice> vol_slices;
  std::map<double, PriceSide> price_slices;
  auto cell = [&](const std::vector<std::string>& row, const char* name) -> const std::string& {
    const std::size_t i = col.at(name);
    if (i >= row.size()) throw DomainError("chain csv line " + std::to_string(line_no) + ": missing column " + name);
    return row[i];
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto row = split_csv(line);
    const double T = parse_number(cell(row, "expiry"), line_no);
    const double K = parse_number(cell(row, "strike"), line_no);
    if (!price_form) {
      const double F = parse_number(cell(row, "forward"), line_no);
      const double bid = parse_number(cell(row, "bidvol"), line_no);
      const double ask = parse_number(cell(row, "askvol"), line_no);
      auto [it, fresh] = vol_slices.try_emplace(T, OptionChainSlice{T, F, 1.0, {}});
      if (!fresh && it->second.forward != F)
        out.warnings.push_back("line " + std::to_string(line_no) + ": forward differs within expiry; first kept");
      if (!(K > 0.0 && bid > 0.0 && bid <= ask)) {
        out.warnings.push_back("line " + std::to_string(line_no) + ": invalid quote dropped");
        continue;
      }
      it->second.quotes.push_back({K, bid, ask});
    } else {
      const std::string type = lower(cell(row, "type"));
      const double bid = parse_number(cell(row, "bidpx"), line_no);
      const double ask = parse_number(cell(row, "askpx"), line_no);
      auto& side = price_slices[T];
      if (type == "c" || type == "call") {
        side.calls.push_back({K, bid, ask});
      } else if (type == "p" || type == "put") {
        side.puts.push_back({K, bid, ask});
      } else {
        throw DomainError("chain csv line " + std::to_string(line_no) + ": Type must be C or P");
      }
    }
  }

  for (auto& [T, sl] : vol_slices) {
    finish_slice(sl, out.warnings);
    out.slices.push_back(std::move(sl));
  }
  for (auto& [T, side] : price_slices) {
    ForwardFit fit{};
    try {
      fit = impute_forward(side.calls, side.puts);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "T=" << T << ": expiry skipped (" << e.what() << ")";
      out.warnings.push_back(os.str());
      continue;
    }
    OptionChainSlice sl{T, fit.forward, fit.discount, {}};
    const double scale = fit.discount * fit.forward;
    auto add = [&](const PriceQuote& q, bool is_call) {
      const double k = std::log(q.strike / fit.forward);
      const double parity = is_call ? 0.0 : 1.0 - std::exp(k);
      try {
        const double bv = call_vol(q.bid_px / scale + parity, k, T);
        const double av = call_vol(q.ask_px / scale + parity, k, T);
        if (bv > av) throw NoSolution("bid above ask");
        sl.quotes.push_back({q.strike, bv, av});
      } catch (const Error& e) {
        std::ostringstream os;
        os << "T=" << T << " K=" << q.strike << ": quote dropped (" << e.what() << ")";
        out.warnings.push_back(os.str());
      }
    };
    for (const auto& c : side.calls)
      if (c.strike >= fit.forward) add(c, true);
    for (const auto& p : side.puts)
      if (p.strike < fit.forward) add(p, false);
    finish_slice(sl, out.warnings);
    out.slices.push_back(std::move(sl));
  }
  std::sort(out.slices.begin(), out.slices.end(),
            [](const OptionChainSlice& a, const OptionChainSlice& b) { return a.expiry_T < b.expiry_T; });
  return out;
}

std::string report_json(const CalibrationReport& report) {
  nlohmann::ordered_json j;
  j["slices"] = nlohmann::ordered_json::array();
  for (const auto& s : report.slices) {
    j["slices"].push_back({{"T", s.T},
                           {"alpha_p", s.params.alpha_p},
                           {"alpha_m", s.params.alpha_m},
                           {"lambda_p", s.params.lambda_p},
                           {"lambda_m", s.params.lambda_m},
                           {"residual", s.residual},
                           {"converged", s.converged},
                           {"bound_active", s.bound_active}});
  }
  j["butterfly_ok"] = report.all_butterfly_ok();
  j["calendar_ok"] = report.all_calendar_ok();
  j["min_density"] = report.min_density;
  j["min_w_gap"] = report.min_w_gap;
  return j.dump(2);
}

}  // namespace ltsmile
