// Command-line front end: space catalogue, partitions, point sets,
// discrepancy reports, invariance checks and bound sweeps.  Every record
// carries the artifact version, the effective config and the seed, and a
// fixed config+seed reproduces the output byte for byte.

#include "metricpoints/invariance.hpp"
#include "metricpoints/serialize.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace mps;

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
    int threads = 0;
};

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out.empty())
        std::cout << text;
    else
        write_text_file(g.out, text);
}

void emit_json(const GlobalOpts& g, const Json& j) { emit(g, j.dump(2) + "\n"); }

RadialMeasure parse_xi(const std::string& spec, const Space& space) {
    if (spec.empty() || spec == "default") return default_xi(space);
    if (spec == "uniform") return RadialMeasure::lebesgue(0.0, space.diameter());
    if (spec == "uniform-atomic") {
        auto radii = space.radii_set();
        if (radii.empty())
            throw ConfigError("uniform-atomic xi needs a finite radius set; use 'uniform'");
        return RadialMeasure::uniform_atomic(std::move(radii));
    }
    if (spec.rfind("uniform[", 0) == 0 && spec.back() == ']') {
        std::string body = spec.substr(8, spec.size() - 9);
        auto comma = body.find(',');
        if (comma == std::string::npos) throw ConfigError("xi spec: expected uniform[lo,hi]");
        double lo = std::stod(body.substr(0, comma));
        double hi = std::stod(body.substr(comma + 1));
        return RadialMeasure::lebesgue(lo, hi);
    }
    throw ConfigError("unknown xi spec: " + spec);
}

std::vector<long> parse_n_list(const std::string& csv) {
    std::vector<long> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stol(item));
    }
    return out;
}

PointSet load_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read points file: " + path);
    Json j = Json::parse(in);
    PointSet ps;
    ps.space_name = j.at("space").get<std::string>();
    ps.seed = j.value("seed", 0ull);
    ps.provenance = Provenance::User;
    for (const auto& row : j.at("points"))
        ps.points.push_back(row.get<std::vector<double>>());
    return ps;
}

Json config_echo(const std::initializer_list<std::pair<std::string, Json>>& kv) {
    Json j;
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

// --config FILE: JSON object whose keys are the subcommand's long flags;
// explicit flags win on conflict.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (config_path.empty() || args.empty()) return args;
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file: " + config_path);
    Json j = Json::parse(in);
    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) tokens.push_back("--" + key);
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    // insert after the subcommand name so explicit flags override
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

int run(int argc, char** argv) {
    CLI::App app{"point distributions, partitions and ball discrepancies on compact "
                 "metric-measure spaces"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.fallthrough(true);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "root RNG seed (echoed in every record)");
    app.add_option("--out", g.out, "output path (stdout when omitted)");
    app.add_option("--format", g.format, "json or csv (batch commands)");
    app.add_option("--threads", g.threads, "worker threads for trials (0 = all cores)");

    std::string space_name = "circle", density, xi_spec = "default", provenance = "iid";
    std::string points_file, n_list_csv, strategy = "lexicographic", diam_mode = "lipschitz";
    long n = 8, trials = 1000;
    double radius = -1.0;
    bool exact_flag = false, box_only = false, slope_summary = false;

    auto add_space = [&](CLI::App* cmd) {
        cmd->add_option("--space", space_name, "space name (see `space list`)");
        cmd->add_option("--density", density, "cube base density (uniform, product-zsq, ...)");
    };

    CLI::App* space_cmd = app.add_subcommand("space", "space catalogue");
    CLI::App* space_list = space_cmd->add_subcommand("list", "list registered spaces");

    CLI::App* part_cmd = app.add_subcommand("partition", "equal-measure partition");
    add_space(part_cmd);
    part_cmd->add_option("--n", n, "cell count")->check(CLI::PositiveNumber);
    part_cmd->add_option("--strategy", strategy, "lexicographic or balanced");
    part_cmd->add_option("--mode", diam_mode, "lipschitz or measured cell diameters");
    part_cmd->add_flag("--box-only", box_only, "emit the cube partition without pushforward");

    CLI::App* points_cmd = app.add_subcommand("points", "generate a point set");
    add_space(points_cmd);
    points_cmd->add_option("--n", n, "point count")->check(CLI::PositiveNumber);
    points_cmd->add_option("--provenance", provenance,
                           "iid | lattice | cell-random | cell-center");

    CLI::App* disc_cmd = app.add_subcommand("discrepancy", "distance sums and discrepancies");
    add_space(disc_cmd);
    disc_cmd->add_option("--n", n, "point count when generating");
    disc_cmd->add_option("--points-file", points_file, "point set JSON produced by `points`");
    disc_cmd->add_option("--provenance", provenance, "iid | lattice");
    disc_cmd->add_option("--xi", xi_spec, "radial measure spec");
    disc_cmd->add_option("--r", radius, "also report the fixed-radius discrepancy at r");
    disc_cmd->add_option("--n-list", n_list_csv, "batch mode: CSV row per point count");

    CLI::App* inv_cmd = app.add_subcommand("invariance", "invariance principle checks");
    add_space(inv_cmd);
    inv_cmd->add_option("--n", n, "point/cell count")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--xi", xi_spec, "radial measure spec");
    inv_cmd->add_option("--trials", trials, "Monte Carlo trials");
    inv_cmd->add_flag("--exact", exact_flag, "per-configuration defect (needs a "
                                             "distance-invariant space)");

    CLI::App* sweep_cmd = app.add_subcommand("bounds-sweep", "bound reports across N");
    add_space(sweep_cmd);
    sweep_cmd->add_option("--n-list", n_list_csv, "comma-separated cell counts")->required();
    sweep_cmd->add_option("--xi", xi_spec, "radial measure spec");
    sweep_cmd->add_option("--trials", trials, "Monte Carlo trials per N");
    sweep_cmd->add_flag("--slope-summary", slope_summary,
                        "print log-log slopes of the bound gaps");

    app.require_subcommand(1);

    std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> cargs = {argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    TrialOpts topts;
    topts.threads = g.threads;

    if (space_list->parsed() || space_cmd->parsed()) {
        Json list = Json::array();
        for (const auto& info : list_spaces()) {
            Json j;
            j["name"] = info.name;
            j["dim"] = info.dim;
            j["diameter"] = info.diameter;
            j["measure_kind"] = info.kind == MeasureKind::ExactFinite ? "exact-finite"
                                : info.kind == MeasureKind::ClosedForm ? "closed-form"
                                                                        : "sampled";
            j["distance_invariant"] = info.distance_invariant;
            j["rectifiable"] = info.rectifiable;
            list.push_back(std::move(j));
        }
        emit_json(g, record_envelope("space list", g.seed, Json::object(), std::move(list)));
        return 0;
    }

    auto space = make_space(SpaceSpec{space_name, density});

    if (part_cmd->parsed()) {
        OccupancyStrategy strat = strategy == "balanced" ? OccupancyStrategy::Balanced
                                                         : OccupancyStrategy::Lexicographic;
        Json cfg = config_echo({{"space", space_name},
                                {"density", density},
                                {"n", n},
                                {"strategy", strategy},
                                {"mode", diam_mode}});
        if (box_only || !space->chart()) {
            auto nu = std::make_shared<CubeMeasure>(
                CubeMeasure::named(density, space->chart() ? space->chart()->dim : space->dim()));
            BoxPartition part = build_box_partition(nu, n, strat);
            emit_json(g, record_envelope("partition", g.seed, cfg, to_json(part)));
            return 0;
        }
        const ChartInfo* chart = space->chart();
        DiameterMode mode = diam_mode == "measured" ? DiameterMode::MeasuredSampling
                                                    : DiameterMode::LipschitzBound;
        if (diam_mode == "lipschitz" && !chart->lipschitz && !part_cmd->count("--mode"))
            mode = DiameterMode::MeasuredSampling;  // only-empirical charts
        SpacePartition part =
            equal_measure_partition(space, n, strat, mode, PushforwardOpts{64, g.seed});
        Json payload = to_json(part);
        auto nu = std::shared_ptr<const CubeMeasure>(space, chart->base);
        BoxPartition boxes = build_box_partition(nu, n, strat);
        payload["k"] = boxes.k;
        payload["strategy"] = strategy_name(strat);
        payload["box_avg_diameter"] = boxes.avg_diameter();
        payload["box_diameter_bound"] = boxes.diameter_bound();
        payload["box_bound_satisfied"] =
            boxes.avg_diameter() <= boxes.diameter_bound() + 1e-12;
        if (chart->lipschitz) {
            double d = chart->dim;
            payload["apriori_avg_diameter_bound"] =
                d * std::ldexp(1.0, chart->dim - 1) * (*chart->lipschitz) *
                std::pow(static_cast<double>(n), -1.0 / d);
        }
        emit_json(g, record_envelope("partition", g.seed, cfg, std::move(payload)));
        return 0;
    }

    if (points_cmd->parsed()) {
        PointSet ps;
        if (provenance == "iid") {
            ps = sample_iid(*space, n, g.seed);
        } else if (provenance == "lattice") {
            ps = lattice_points(*space, n);
        } else if (provenance == "cell-random" || provenance == "cell-center") {
            DiameterMode mode = space->chart() && !space->chart()->lipschitz
                                    ? DiameterMode::MeasuredSampling
                                    : DiameterMode::LipschitzBound;
            SpacePartition part = equal_measure_partition(
                space, n, OccupancyStrategy::Lexicographic, mode, PushforwardOpts{64, g.seed});
            if (provenance == "cell-random") {
                OmegaSampler sampler(part);
                RngStream rng(g.seed);
                ps = sampler.sample(rng);
            } else {
                ps.space_name = space->name();
                ps.provenance = Provenance::PartitionCellCenter;
                for (const auto& cell : part.cells) {
                    std::vector<double> mid(cell.lo.size());
                    for (std::size_t a = 0; a < mid.size(); ++a)
                        mid[a] = 0.5 * (cell.lo[a] + cell.hi[a]);
                    ps.points.push_back(space->chart()->map(mid));
                }
            }
        } else {
            throw ConfigError("unknown provenance: " + provenance);
        }
        ps.seed = g.seed;
        Json cfg = config_echo({{"space", space_name},
                                {"density", density},
                                {"n", n},
                                {"provenance", provenance}});
        emit_json(g, record_envelope("points", g.seed, cfg, to_json(ps)));
        return 0;
    }

    if (disc_cmd->parsed()) {
        RadialMeasure xi = parse_xi(xi_spec, *space);
        Json cfg = config_echo({{"space", space_name},
                                {"density", density},
                                {"xi", xi_spec},
                                {"provenance", provenance}});
        if (!n_list_csv.empty()) {
            auto ns = parse_n_list(n_list_csv);
            if (ns.empty()) throw ConfigError("empty --n-list");
            std::ostringstream csv;
            csv << discrepancy_csv_header() << "\n";
            for (long nn : ns) {
                PointSet ps = provenance == "lattice" ? lattice_points(*space, nn)
                                                      : sample_iid(*space, nn, g.seed + nn);
                DiscrepancyReport rep = compute_discrepancy_report(
                    *space, ps, xi, DiscrepancyOpts{100000, g.seed + nn});
                csv << discrepancy_csv_row(rep) << "\n";
            }
            emit(g, csv.str());
            return 0;
        }
        PointSet ps;
        if (!points_file.empty())
            ps = load_points(points_file);
        else if (provenance == "lattice")
            ps = lattice_points(*space, n);
        else
            ps = sample_iid(*space, n, g.seed);
        DiscrepancyReport rep =
            compute_discrepancy_report(*space, ps, xi, DiscrepancyOpts{100000, g.seed});
        Json payload = to_json(rep);
        if (radius >= 0.0) {
            payload["r"] = radius;
            payload["lambda_r_integral"] =
                to_json(l2_discrepancy_r(*space, ps, radius, L2Mode::Integral,
                                         DiscrepancyOpts{100000, g.seed}));
            payload["lambda_r_kernel"] =
                to_json(l2_discrepancy_r(*space, ps, radius, L2Mode::Kernel,
                                         DiscrepancyOpts{20000, g.seed}));
        }
        emit_json(g, record_envelope("discrepancy", g.seed, cfg, std::move(payload)));
        return 0;
    }

    if (inv_cmd->parsed()) {
        RadialMeasure xi = parse_xi(xi_spec, *space);
        Json cfg = config_echo({{"space", space_name},
                                {"density", density},
                                {"xi", xi_spec},
                                {"n", n},
                                {"trials", trials},
                                {"exact", exact_flag}});
        bool auto_exact = !inv_cmd->count("--trials") &&
                          space->distance_invariant() &&
                          (space->finite() || space->name() == "circle");
        if (exact_flag || auto_exact) {
            PointSet ps = sample_iid(*space, n, g.seed);
            InvarianceOutcome out =
                exact_invariance_defect(*space, ps, xi, DiscrepancyOpts{100000, g.seed});
            Json payload;
            payload["space"] = space->name();
            payload["xi"] = xi.description();
            payload["n"] = n;
            payload["mode"] = out.mode;
            payload["lhs"] = out.lhs;
            payload["rhs"] = out.rhs;
            payload["defect"] = out.defect;
            payload["tolerance"] = out.tolerance;
            payload["exact_zero"] = out.exact_zero;
            emit_json(g, record_envelope("invariance", g.seed, cfg, std::move(payload)));
            return 0;
        }
        if (trials < 2) throw ConfigError("invariance: trials >= 2 for a confidence interval");
        DiameterMode mode = space->chart() && !space->chart()->lipschitz
                                ? DiameterMode::MeasuredSampling
                                : DiameterMode::LipschitzBound;
        SpacePartition part = equal_measure_partition(
            space, n, OccupancyStrategy::Lexicographic, mode, PushforwardOpts{64, g.seed});
        OmegaSampler sampler(part);
        InvarianceReport rep = probabilistic_invariance_check(sampler, xi, trials, g.seed, topts);
        emit_json(g, record_envelope("invariance", g.seed, cfg, to_json(rep)));
        return 0;
    }

    if (sweep_cmd->parsed()) {
        RadialMeasure xi = parse_xi(xi_spec, *space);
        auto ns = parse_n_list(n_list_csv);
        if (ns.empty()) throw ConfigError("empty --n-list");
        std::ostringstream csv;
        csv << bounds_sweep_csv_header() << "\n";
        std::vector<double> log_n, log_gap, log_lambda;
        DiameterMode mode = space->chart() && !space->chart()->lipschitz
                                ? DiameterMode::MeasuredSampling
                                : DiameterMode::LipschitzBound;
        for (long nn : ns) {
            SpacePartition part = equal_measure_partition(
                space, nn, OccupancyStrategy::Lexicographic, mode, PushforwardOpts{64, g.seed});
            OmegaSampler sampler(part);
            BoundReport rep = bound_report(sampler, xi, trials, g.seed + nn, topts);
            csv << bounds_sweep_csv_row(rep) << "\n";
            double gap = static_cast<double>(nn) * static_cast<double>(nn) *
                             rep.mean_rho.value -
                         rep.rho_mc_mean.value;
            if (gap > 0.0 && nn > 1) {
                log_n.push_back(std::log(static_cast<double>(nn)));
                log_gap.push_back(std::log(gap));
            }
            if (rep.lambda_mc_mean.value > 0.0 && nn > 1) {
                log_lambda.push_back(std::log(rep.lambda_mc_mean.value));
            }
        }
        emit(g, csv.str());
        if (slope_summary && log_n.size() >= 2) {
            double d = space->dim();
            std::cout << "# slope(log gap vs log N) = "
                      << format_double(regression_slope(log_n, log_gap))
                      << " (predicted " << format_double(1.0 - 1.0 / d) << ")\n";
            if (log_lambda.size() == log_n.size())
                std::cout << "# slope(log lambda vs log N) = "
                          << format_double(regression_slope(log_n, log_lambda))
                          << " (predicted " << format_double(1.0 - 1.0 / d) << ")\n";
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.get_name() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mps::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 3;
    } catch (const mps::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::out_of_range& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
