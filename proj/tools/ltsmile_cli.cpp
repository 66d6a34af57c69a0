#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ltsmile/calib.hpp"
#include "ltsmile/moments.hpp"
#include "ltsmile/pricer.hpp"
#include "ltsmile/saddle.hpp"
#include "ltsmile/smile.hpp"

using namespace ltsmile;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelArgs {
  std::string model = "heston";
  std::string params_file;
  std::map<std::string, double> values;
};

const std::vector<std::pair<std::string, std::string>> kParamFlags{
    {"v", "BS variance"},
    {"vbar", "Heston long-run variance"},
    {"lambda", "Heston mean reversion or Merton jump intensity"},
    {"eta", "Heston vol of vol"},
    {"rho", "Heston correlation"},
    {"v0", "Heston initial variance (defaults to vbar)"},
    {"sigma", "VG or Merton diffusion volatility"},
    {"theta", "VG drift"},
    {"nu", "VG gamma variance"},
    {"alpha-p", "BG shape, positive jumps"},
    {"alpha-m", "BG shape, negative jumps"},
    {"lambda-p", "BG rate, positive jumps"},
    {"lambda-m", "BG rate, negative jumps"},
    {"C", "CGMY C"},
    {"G", "CGMY G"},
    {"M", "CGMY M"},
    {"Y", "CGMY Y"},
    {"alpha", "Merton mean jump size"},
    {"delta", "Merton jump size std"},
};

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--model", m.model, "bs, heston, vg, bg, cgmy or merton")
      ->check(CLI::IsMember({"bs", "heston", "vg", "bg", "cgmy", "merton"}));
  sub->add_option("--params", m.params_file, "JSON file with a model name and its parameters");
  for (const auto& [name, help] : kParamFlags) {
    sub->add_option_function<double>("--" + name, [&m, name](double v) { m.values[name] = v; }, help);
  }
}

ModelSpec build_model(const ModelArgs& args) {
  std::string name = args.model;
  std::map<std::string, double> vals;
  if (!args.params_file.empty()) {
    std::ifstream in(args.params_file);
    if (!in) throw UsageError("cannot open " + args.params_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(args.params_file + ": " + e.what());
    }
    if (j.contains("model")) name = j["model"].get<std::string>();
    for (const auto& [k, v] : j.items()) {
      if (v.is_number()) vals[k] = v.get<double>();
    }
  }
  for (const auto& [k, v] : args.values) vals[k] = v;
  auto get = [&](const char* key, double def) {
    const auto it = vals.find(key);
    return it == vals.end() ? def : it->second;
  };
  if (name == "bs") return BSParams{get("v", typical::bs.v)};
  if (name == "heston") {
    HestonParams p{get("vbar", typical::heston.v_bar), get("lambda", typical::heston.lambda),
                   get("eta", typical::heston.eta), get("rho", typical::heston.rho), std::nullopt};
    if (vals.count("v0")) p.v0 = vals["v0"];
    return p;
  }
  if (name == "vg") return VGParams{get("sigma", typical::vg.sigma), get("theta", typical::vg.theta), get("nu", typical::vg.nu)};
  if (name == "bg")
    return BGParams{get("alpha-p", get("alpha_p", typical::bg.alpha_p)), get("alpha-m", get("alpha_m", typical::bg.alpha_m)),
                    get("lambda-p", get("lambda_p", typical::bg.lambda_p)),
                    get("lambda-m", get("lambda_m", typical::bg.lambda_m))};
  if (name == "cgmy")
    return CGMYParams{get("C", typical::cgmy.C), get("G", typical::cgmy.G), get("M", typical::cgmy.M), get("Y", typical::cgmy.Y)};
  if (name == "merton")
    return MertonParams{get("sigma", typical::merton.sigma), get("lambda", typical::merton.lambda),
                        get("alpha", typical::merton.alpha), get("delta", typical::merton.delta)};
  throw UsageError("unknown model '" + name + "'");
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("not a number: '" + s + "'");
}

// "min:max:n" with inclusive endpoints, or a comma-separated list.
std::vector<double> parse_points(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string tok;
  if (spec.find(':') != std::string::npos) {
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 3) throw UsageError("grid must be min:max:n, got '" + spec + "'");
    const double a = to_double(parts[0]);
    const double b = to_double(parts[1]);
    const double nd = to_double(parts[2]);
    if (nd < 2 || nd != std::floor(nd)) throw UsageError("grid n must be an integer >= 2");
    if (!(b > a)) throw UsageError("grid max must exceed min");
    const auto n = static_cast<int>(nd);
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
    return v;
  }
  std::vector<double> v;
  while (std::getline(ss, tok, ',')) v.push_back(to_double(tok));
  if (v.empty()) throw UsageError("empty point list");
  return v;
}

SaddleMethod parse_method(const std::string& s) {
  if (s == "closed") return SaddleMethod::Closed;
  if (s == "numeric") return SaddleMethod::Numeric;
  return SaddleMethod::Auto;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot write " + path);
    }
    stream() << std::setprecision(17);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_table(std::ostream& os, const std::string& format, const std::vector<std::string>& cols,
                 const std::vector<std::vector<double>>& rows) {
  if (format == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      json o;
      for (std::size_t i = 0; i < cols.size(); ++i) o[cols[i]] = number(r[i]);
      j.push_back(o);
    }
    os << j.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

std::vector<BGISlice> read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  if (!j.contains("slices") || !j["slices"].is_array()) throw UsageError(path + ": no slices array");
  std::vector<BGISlice> out;
  for (const auto& s : j["slices"]) {
    out.push_back({s.at("T").get<double>(),
                   {s.at("alpha_p").get<double>(), s.at("alpha_m").get<double>(), s.at("lambda_p").get<double>(),
                    s.at("lambda_m").get<double>()},
                   s.value("residual", 0.0),
                   s.value("converged", true),
                   s.value("bound_active", false)});
  }
  if (out.empty()) throw UsageError(path + ": no slices parsed");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-time implied volatility smiles, Fourier pricing and BGI calibration"};
  app.require_subcommand(1);
  std::string output;
  std::string format = "csv";
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("-o,--output", output, "output path (stdout when omitted)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  ModelArgs margs;
  std::string grid = "-1:1:401";
  std::string conv_x = "0";
  std::string arb_k = "-1.5:1.5:3001";
  std::string dens_k = "-1:1:2001";
  std::string small_k = "-0.5:0.5:101";
  std::string method = "auto";
  std::string t_list = "4,8,16,32,64";
  std::string input;
  std::string params_report;
  std::string guess = "10,0.6,35,5";
  std::uint64_t seed = CalibrationOptions{}.seed;
  double T = 1.0;
  int slice_index = -1;

  auto* smile = app.add_subcommand("smile", "large-time smile v(x) on an x grid");
  add_model_options(smile, margs);
  smile->add_option("--x", grid, "x grid min:max:n or list");
  smile->add_option("--method", method, "auto, closed or numeric")->check(CLI::IsMember({"auto", "closed", "numeric"}));
  add_io(smile);

  auto* conv = app.add_subcommand("converge", "FFT implied vols against the large-time limit");
  add_model_options(conv, margs);
  conv->add_option("--T", t_list, "comma-separated expiries");
  conv->add_option("--x", conv_x, "x grid min:max:n or list");
  add_io(conv);

  auto* mom = app.add_subcommand("moments", "ATM moment expansion and Lee wing slopes");
  add_model_options(mom, margs);
  add_io(mom);

  auto* cal = app.add_subcommand("calibrate", "BGI calibration of an option chain");
  cal->add_option("-i,--input", input, "chain CSV")->required();
  cal->add_option("--guess", guess, "alpha_p,alpha_m,lambda_p,lambda_m");
  cal->add_option("--seed", seed, "multi-start seed");
  add_io(cal);

  auto* arb = app.add_subcommand("arbcheck", "butterfly and calendar checks of a calibration report");
  arb->add_option("--params", params_report, "report JSON")->required();
  arb->add_option("--k", arb_k, "log-strike grid");
  add_io(arb);

  auto* dens = app.add_subcommand("density", "implied density of a BGI slice or a model slice");
  add_model_options(dens, margs);
  dens->add_option("--report", params_report, "report JSON; density of slice --slice");
  dens->add_option("--slice", slice_index, "slice index in the report");
  dens->add_option("--T", T, "expiry for a model slice");
  dens->add_option("--k", dens_k, "log-strike grid");
  add_io(dens);

  auto* small = app.add_subcommand("smalltime", "small-time total variance limit");
  add_model_options(small, margs);
  small->add_option("--k", small_k, "log-strike grid");
  add_io(small);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (smile->parsed()) {
      const ModelSpec m = build_model(margs);
      const auto xs = parse_points(grid);
      const auto s = build_smile(m, xs, parse_method(method));
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < xs.size(); ++i)
        rows.push_back({xs[i], s.omega[i], s.omega_bar[i], s.v[i], std::sqrt(s.v[i])});
      Output out(output);
      write_table(out.stream(), format, {"x", "omega", "omega_bar", "v", "vol"}, rows);
    } else if (conv->parsed()) {
      const ModelSpec m = build_model(margs);
      const auto Ts = parse_points(t_list);
      const auto xs = parse_points(conv_x);
      const auto rows = convergence_study(m, Ts, xs);
      Output out(output);
      if (format == "json") {
        std::vector<std::vector<double>> t;
        for (const auto& r : rows) t.push_back({r.T, r.x, r.vol_fft, r.vol_limit, r.abs_err});
        write_table(out.stream(), format, {"T", "x", "vol_fft", "vol_limit", "abs_err"}, t);
      } else {
        write_convergence_csv(out.stream(), rows);
      }
    } else if (mom->parsed()) {
      const ModelSpec m = build_model(margs);
      const auto e = w_expansion_coeffs(m);
      const auto lw = lee_wings(m);
      const std::vector<std::pair<std::string, double>> kv{
          {"psi0", e.psi0},   {"ubar0", e.ubar0}, {"m2", e.m2},
          {"m3", e.m3},       {"m4", e.m4},       {"w0", e.w_coeffs[0]},
          {"w1", e.w_coeffs[1]}, {"w2", e.w_coeffs[2]}, {"w3", e.w_coeffs[3]},
          {"w4", e.w_coeffs[4]}, {"beta_minus", lw.beta_minus}, {"beta_plus", lw.beta_plus},
          {"p_tilde", lw.p_tilde}, {"q_tilde", lw.q_tilde}};
      Output out(output);
      if (format == "json") {
        json j;
        for (const auto& [k, v] : kv) j[k] = number(v);
        out.stream() << j.dump(2) << '\n';
      } else {
        out.stream() << "name,value\n";
        for (const auto& [k, v] : kv) out.stream() << k << ',' << v << '\n';
      }
    } else if (cal->parsed()) {
      std::ifstream in(input);
      if (!in) throw UsageError("cannot open " + input);
      const auto parsed = read_chain_csv(in);
      for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
      if (parsed.slices.empty()) throw UsageError("no slices parsed");
      const auto g = parse_points(guess);
      if (g.size() != 4) throw UsageError("--guess needs four values");
      CalibrationOptions opts;
      opts.seed = seed;
      const auto rep = calibrate_surface(parsed.slices, BGParams{g[0], g[1], g[2], g[3]}, default_bgi_bounds(), opts);
      Output out(output);
      out.stream() << report_json(rep) << '\n';
    } else if (arb->parsed()) {
      const auto slices = read_report(params_report);
      const auto ks = parse_points(arb_k);
      const auto cal_res = calendar_check(slices, ks);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < slices.size(); ++i) {
        const double md = min_density(bgi_total_variance(slices[i]), ks.front(), ks.back(), ks[1] - ks[0]);
        const double gap = i == 0 ? std::numeric_limits<double>::quiet_NaN() : [&] {
          const auto pair = std::vector<BGISlice>{slices[i - 1], slices[i]};
          return calendar_check(pair, ks).min_gap;
        }();
        rows.push_back({slices[i].T, md, md >= 0.0 ? 1.0 : 0.0, gap});
      }
      Output out(output);
      write_table(out.stream(), format, {"T", "min_density", "butterfly_ok", "w_gap_to_previous"}, rows);
      if (!cal_res.ok) std::cerr << "calendar arbitrage detected, min gap " << cal_res.min_gap << '\n';
    } else if (dens->parsed()) {
      TotalVarianceFn wf;
      if (!params_report.empty()) {
        const auto slices = read_report(params_report);
        if (slice_index < 0 || slice_index >= static_cast<int>(slices.size())) throw UsageError("--slice out of range");
        wf = bgi_total_variance(slices[static_cast<std::size_t>(slice_index)]);
      } else {
        if (!(T > 0.0)) throw UsageError("--T must be positive");
        auto m = std::make_shared<ModelSpec>(build_model(margs));
        wf = [m, T](double k) { return total_variance(*m, k, T); };
      }
      std::vector<std::vector<double>> rows;
      for (double k : parse_points(dens_k)) rows.push_back({k, wf(k), implied_density(wf, k)});
      Output out(output);
      write_table(out.stream(), format, {"k", "w", "density"}, rows);
    } else if (small->parsed()) {
      const ModelSpec m = build_model(margs);
      std::vector<std::vector<double>> rows;
      for (double k : parse_points(small_k)) rows.push_back({k, small_time_total_variance(m, k)});
      Output out(output);
      write_table(out.stream(), format, {"k", "w0"}, rows);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
