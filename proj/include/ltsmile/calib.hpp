#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ltsmile/model.hpp"

namespace ltsmile {

struct OptionQuote {
  double strike;
  double bid_vol;
  double ask_vol;
};

struct OptionChainSlice {
  double expiry_T;
  double forward;
  double discount;
  std::vector<OptionQuote> quotes;  // strictly increasing strikes
  void validate(std::size_t min_quotes = 5) const;
};

struct PriceQuote {
  double strike;
  double bid_px;
  double ask_px;
  double mid() const { return 0.5 * (bid_px + ask_px); }
};

struct ForwardFit {
  double forward;
  double discount;
  double rms;  // residual RMS of the parity regression
};

// Least squares of C_mid - P_mid = DF (F - K) over strikes quoted on both sides.
ForwardFit impute_forward(std::span<const PriceQuote> calls, std::span<const PriceQuote> puts);

// Parameter order: alpha_p, alpha_m, lambda_p, lambda_m.
struct BGIBounds {
  std::array<double, 4> lo;
  std::array<double, 4> hi;
};
BGIBounds default_bgi_bounds();

inline constexpr double kSmilePenalty = 1e6;

// Vega-weighted squared distance of the BGI vol to bid and ask; each quote whose smile
// cannot be evaluated adds kSmilePenalty.
double bgi_objective(const BGParams& params, const OptionChainSlice& slice);

// Large-time BG implied vol sqrt(w(k, T) / T) at a quoted strike.
double bgi_vol(const BGParams& params, double k, double T);

struct BGISlice {
  double T;
  BGParams params;
  double residual;
  bool converged;
  bool bound_active;
};

struct CalibrationReport {
  std::vector<BGISlice> slices;
  std::vector<bool> butterfly_ok;  // per slice
  std::vector<bool> calendar_ok;   // per adjacent pair
  double min_density;
  double min_w_gap;  // NaN with fewer than two slices
  bool all_butterfly_ok() const;
  bool all_calendar_ok() const;
};

struct CalibrationOptions {
  std::uint64_t seed = 20240601;
  int starts = 3;
  int max_iter = 4000;
  double size_tol = 1e-7;
  double density_k_min = -1.0;
  double density_k_max = 1.0;
  double calendar_k_min = -1.5;
  double calendar_k_max = 1.5;
  double k_step = 1e-3;
};

CalibrationReport calibrate_surface(std::span<const OptionChainSlice> chain, const BGParams& guess,
                                    const BGIBounds& bounds = default_bgi_bounds(),
                                    const CalibrationOptions& opts = {});

using TotalVarianceFn = std::function<double(double)>;
TotalVarianceFn bgi_total_variance(const BGISlice& slice);

// g(k) exp(-d2^2 / 2) / sqrt(2 pi w), derivatives of w by centred differences.
double implied_density(const TotalVarianceFn& w_fn, double k);
double min_density(const TotalVarianceFn& w_fn, double k_min, double k_max, double k_step);

struct CalendarResult {
  bool ok;
  double min_gap;
  std::vector<bool> pair_ok;
};
CalendarResult calendar_check(std::span<const BGISlice> slices, std::span<const double> k_grid);

struct ChainParse {
  std::vector<OptionChainSlice> slices;
  std::vector<std::string> warnings;
};
// Accepts the vol form (Expiry,Forward,Strike,BidVol,AskVol) or the price form
// (Expiry,Type,Strike,BidPx,AskPx).
ChainParse read_chain_csv(std::istream& in);

std::string report_json(const CalibrationReport& report);

}  // namespace ltsmile
