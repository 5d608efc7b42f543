#include "ftk/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftk/errors.hpp"

namespace ftk {

namespace {

std::string num(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir + "'");
    }
}

double node_time(const Date& asof, const YearMonth& month) {
    return year_fraction_act365(asof.sys_days(), month.first_day());
}

FitReport merge_reports(const FitReport& hyper, const FitReport& map) {
    FitReport r = hyper;
    r.objective = map.objective;
    r.max_violation = map.max_violation;
    r.kkt_residual = map.kkt_residual;
    r.qp_iterations = map.qp_iterations;
    r.active_constraints = map.active_constraints;
    r.converged = hyper.converged && map.converged;
    return r;
}

const char* const kExitCodes = R"(
Exit codes: 0 success, 2 input parse/validation/IO error, 3 infeasible quotes,
4 numerical or sampling failure, 5 configuration or coverage error.
Environment: FTK_GAMMA, FTK_SEED and FTK_SAMPLES supply defaults for
--gamma, --seed and --samples; explicit flags win.)";

}  // namespace

void validate_config(const RunConfig& config) {
    if (config.gamma && !(std::isfinite(*config.gamma) && *config.gamma >= 0.0)) {
        throw ConfigError("gamma must be a finite value >= 0");
    }
    if (config.n_samples < 100) {
        throw ConfigError("sample count must be at least 100, got " + std::to_string(config.n_samples));
    }
    const auto& q = config.quantiles;
    if (!(q.lower > 0.0 && q.lower < q.upper && q.upper < 1.0)) {
        throw ConfigError("quantiles must satisfy 0 < lower < upper < 1");
    }
}

Calibration calibrate_snapshot(const MarketSnapshot& snapshot, const RunConfig& config) {
    validate_snapshot(snapshot);
    const TimeGrid grid = TimeGrid::covering(snapshot);
    const ConstraintSystem cs = build_constraints(snapshot, grid);
    const HyperFit hyper = fit_hyperparams(cs, grid);

    double gamma = 0.0;
    if (config.seasonality) {
        if (config.gamma) {
            gamma = *config.gamma;
        } else if (grid.size() > 13) {
            gamma = default_gamma(cs, grid);
        }
    }
    const MapFit penalized = solve_map(cs, grid, hyper.params, build_season_penalty(grid, gamma));
    const MapFit plain =
        gamma > 0.0 ? solve_map(cs, grid, hyper.params, build_season_penalty(grid, 0.0)) : penalized;

    Calibration result;
    PersistedModel& m = result.model;
    m.snapshot = snapshot;
    m.penalized = penalized.model;
    m.plain = plain.model;
    m.report = merge_reports(hyper.report, penalized.report);
    m.plain_report = merge_reports(hyper.report, plain.report);
    m.benchmark_nugget = kDefaultNugget;

    const KernelParams bench_params =
        config.refit_benchmark ? refit_benchmark_params(snapshot, grid) : hyper.params;
    result.benchmark = fit_benchmark(snapshot, grid, bench_params, m.benchmark_nugget);

    for (const auto& q : snapshot.quotes) {
        const auto months = delivery_months(q);
        result.table.push_back({q.id, q.bid, q.ask, price_window(m.penalized, months),
                                price_window(m.plain, months), benchmark_window(result.benchmark, grid, months)});
    }
    return result;
}

std::string format_table(const std::vector<PriceRow>& table, TableFormat format) {
    if (format == TableFormat::Json) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : table) {
            rows.push_back({{"id", r.id}, {"bid", r.bid}, {"ask", r.ask}, {"F", r.F}, {"F_K", r.F_K}, {"F_B", r.F_B}});
        }
        return rows.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "id,bid,ask,F,F_K,F_B\n";
    for (const auto& r : table) {
        out << r.id << ',' << num(r.bid) << ',' << num(r.ask) << ',' << num(r.F) << ',' << num(r.F_K) << ','
            << num(r.F_B) << '\n';
    }
    return out.str();
}

std::string format_curve(const Calibration& calibration) {
    const auto& m = calibration.model;
    const TimeGrid& grid = m.penalized.grid;
    std::ostringstream out;
    out << "delivery_start,t,F,F_K,F_B\n";
    for (int k = 0; k < grid.size(); ++k) {
        out << grid.month(k).to_string() << ',' << num(node_time(m.snapshot.observation_date, grid.month(k))) << ','
            << num(m.penalized.xi(k)) << ',' << num(m.plain.xi(k)) << ','
            << num(eval_benchmark(calibration.benchmark, grid.time(k))) << '\n';
    }
    return out.str();
}

std::vector<BandSeries> compute_bands(const PersistedModel& model, const RunConfig& config, bool unpenalized,
                                      PosteriorBand* band_out) {
    validate_config(config);
    const CurveModel& curve = unpenalized ? model.plain : model.penalized;
    const TimeGrid& grid = curve.grid;
    const TimeGrid expected = TimeGrid::covering(model.snapshot);
    if (expected.origin() != grid.origin() || expected.size() != grid.size()) {
        throw ConfigError("model grid does not cover its own quotes");
    }
    const ConstraintSystem cs = build_constraints(model.snapshot, grid);
    const PosteriorSpec spec = make_posterior(cs, grid, curve.params, build_season_penalty(grid, curve.gamma_penalty),
                                              config.seed, config.n_samples);
    const PosteriorBand band = sample_posterior(spec, cs, config.quantiles);

    std::vector<BandSeries> series;
    for (int period : kBandPeriods) {
        BandSeries s{period, {}};
        for (int k = 0; k + period <= grid.size(); ++k) {
            const auto months = window_months({grid.month(k), grid.month(k + period - 1)});
            const Vector w = window_weights(grid, months);
            BandRow row;
            row.delivery_start = grid.month(k);
            row.t = node_time(model.snapshot.observation_date, row.delivery_start);
            std::tie(row.lower, row.upper) = band_for_window(band, grid, months);
            row.mean = (band.samples.transpose() * w).mean();
            row.map = price_window(curve, months);
            s.rows.push_back(row);
        }
        series.push_back(std::move(s));
    }
    if (band_out) *band_out = band;
    return series;
}

std::string format_band(const BandSeries& series) {
    std::ostringstream out;
    out << "delivery_start,t,lower,mean,upper,map\n";
    for (const auto& r : series.rows) {
        out << r.delivery_start.to_string() << ',' << num(r.t) << ',' << num(r.lower) << ',' << num(r.mean) << ','
            << num(r.upper) << ',' << num(r.map) << '\n';
    }
    return out.str();
}

std::vector<DeliveryMonth> parse_price_window(const std::string& text) {
    const auto colon = text.find(':');
    try {
        const YearMonth first = YearMonth::parse(text.substr(0, colon));
        const YearMonth last = colon == std::string::npos ? first : YearMonth::parse(text.substr(colon + 1));
        if (last < first) throw ConfigError("window '" + text + "' ends before it starts");
        return window_months({first, last});
    } catch (const std::invalid_argument&) {
        throw ConfigError("window '" + text + "' is not of the form YYYY-MM:YYYY-MM");
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Arbitrage-consistent futures term structures from bid/ask quotes", "ftk"};
    app.footer(std::string(snapshot_csv_schema()) + kExitCodes);
    app.require_subcommand(1);

    RunConfig cfg;
    std::string asof_text;
    double gamma = 0.0;
    std::string format = "csv";
    std::string model_path;
    std::string window;
    std::vector<double> quantiles;
    bool unpenalized = false;
    bool with_band = false;

    auto* cal = app.add_subcommand("calibrate", "Fit both curve variants and the benchmark; write table, curve, model");
    cal->add_option("--input", cfg.input, "quote CSV file")->required();
    cal->add_option("--asof", asof_text, "observation date YYYY-MM-DD")->required();
    auto* gamma_opt = cal->add_option("--gamma", gamma, "seasonality penalty weight (default: data-scaled)")
                          ->envname("FTK_GAMMA");
    auto* no_season = cal->add_flag("--no-seasonality", "fit the penalized variant with gamma = 0");
    cal->add_flag("--refit-benchmark", cfg.refit_benchmark, "refit benchmark hyperparameters on monthly quotes");
    cal->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
    cal->add_option("--out", cfg.out_dir, "output directory")->required();

    auto add_sampling = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "sampler seed")->envname("FTK_SEED");
        sub->add_option("--samples", cfg.n_samples, "number of posterior draws")->envname("FTK_SAMPLES");
        sub->add_option("--quantiles", quantiles, "lower and upper band quantiles")->expected(2);
        sub->add_flag("--unpenalized", unpenalized, "use the gamma = 0 variant");
    };
    auto* band = app.add_subcommand("band", "Posterior bands for 1, 3, 6 and 12 month contracts");
    band->add_option("--model", model_path, "model.json from calibrate")->required();
    add_sampling(band);
    band->add_option("--out", cfg.out_dir, "output directory")->required();

    auto* price = app.add_subcommand("price", "Price a delivery window with a calibrated model");
    price->add_option("--model", model_path, "model.json from calibrate")->required();
    price->add_option("--window", window, "inclusive delivery months YYYY-MM:YYYY-MM")->required();
    price->add_flag("--band", with_band, "also print the posterior band");
    add_sampling(price);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorClass::Config);
    }

    try {
        if (quantiles.size() == 2) cfg.quantiles = {quantiles[0], quantiles[1]};
        if (cal->parsed()) {
            try {
                cfg.asof = Date::parse(asof_text);
            } catch (const std::invalid_argument&) {
                throw ConfigError("--asof '" + asof_text + "' is not a YYYY-MM-DD date");
            }
            if (gamma_opt->count() > 0) cfg.gamma = gamma;
            cfg.seasonality = no_season->count() == 0;
            cfg.format = format == "json" ? TableFormat::Json : TableFormat::Csv;
            validate_config(cfg);

            const auto started = std::chrono::steady_clock::now();
            const MarketSnapshot snapshot = parse_snapshot(cfg.input, cfg.asof);
            const Calibration result = calibrate_snapshot(snapshot, cfg);
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

            ensure_dir(cfg.out_dir);
            const std::filesystem::path dir(cfg.out_dir);
            write_text(dir / (cfg.format == TableFormat::Json ? "table.json" : "table.csv"),
                       format_table(result.table, cfg.format));
            write_text(dir / "curve.csv", format_curve(result));
            save_model(result.model, (dir / "model.json").string());

            const auto& m = result.model;
            out << "quotes " << snapshot.quotes.size() << ", nodes " << m.penalized.grid.size() << ", sigma "
                << num(m.penalized.params.sigma) << ", theta " << num(m.penalized.params.theta) << ", gamma "
                << num(m.penalized.gamma_penalty) << ", nll " << num(m.report.nll) << ", seconds " << elapsed
                << '\n';
        } else if (band->parsed()) {
            validate_config(cfg);
            const PersistedModel model = load_model(model_path);
            PosteriorBand sampled;
            const auto series = compute_bands(model, cfg, unpenalized, &sampled);
            ensure_dir(cfg.out_dir);
            const std::filesystem::path dir(cfg.out_dir);
            for (const auto& s : series) {
                write_text(dir / ("band_" + std::to_string(s.months) + "m.csv"), format_band(s));
            }
            out << "accepted " << sampled.samples_kept << " of " << cfg.n_samples << " draws (rate "
                << num(sampled.acceptance_rate) << ")\n";
        } else if (price->parsed()) {
            validate_config(cfg);
            const PersistedModel model = load_model(model_path);
            const CurveModel& curve = unpenalized ? model.plain : model.penalized;
            const auto months = parse_price_window(window);
            const double value = price_window(curve, months);
            if (with_band) {
                const TimeGrid& grid = curve.grid;
                const ConstraintSystem cs = build_constraints(model.snapshot, grid);
                const PosteriorSpec spec =
                    make_posterior(cs, grid, curve.params, build_season_penalty(grid, curve.gamma_penalty), cfg.seed,
                                   cfg.n_samples);
                const PosteriorBand sampled = sample_posterior(spec, cs, cfg.quantiles);
                const auto [lo, hi] = band_for_window(sampled, grid, months);
                out << "window,F,lower,upper\n" << window << ',' << num(value) << ',' << num(lo) << ',' << num(hi)
                    << '\n';
            } else {
                out << "window,F\n" << window << ',' << num(value) << '\n';
            }
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    }
}

}  // namespace ftk
