#include "metricpoints/invariance.hpp"
#include "metricpoints/serialize.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mps;

namespace {

py::object json_to_py(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return py::none();
        case Json::value_t::boolean: return py::bool_(j.get<bool>());
        case Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case Json::value_t::number_float: return py::float_(j.get<double>());
        case Json::value_t::string: return py::str(j.get<std::string>());
        case Json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case Json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

py::dict estimate_to_py(const Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["stderr"] = e.stderr_;
    d["method"] = e.method;
    return d;
}

PointSet points_from_py(std::shared_ptr<const Space> space,
                        const std::vector<Point>& points) {
    PointSet ps;
    ps.space_name = space->name();
    ps.provenance = Provenance::User;
    ps.points = points;
    for (const auto& p : ps.points) space->validate_point(p);
    return ps;
}

RadialMeasure xi_from_spec(const Space& space, const std::string& spec, double lo, double hi) {
    if (spec == "default") return default_xi(space);
    if (spec == "uniform")
        return RadialMeasure::lebesgue(lo, hi < 0 ? space.diameter() : hi);
    if (spec == "uniform-atomic") return RadialMeasure::uniform_atomic(space.radii_set());
    throw ConfigError("unknown xi spec: " + spec);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "point distributions, equal-measure partitions and ball discrepancies "
              "on compact metric-measure spaces";
    m.attr("__version__") = version();

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<PreconditionError>(m, "PreconditionError");
    py::register_exception<UnsupportedError>(m, "UnsupportedError");

    py::class_<RadialMeasure>(m, "RadialMeasure")
        .def_static("lebesgue", &RadialMeasure::lebesgue, py::arg("lo"), py::arg("hi"))
        .def_static("uniform_atomic", &RadialMeasure::uniform_atomic, py::arg("radii"))
        .def_static("atomic", &RadialMeasure::atomic, py::arg("radii"), py::arg("weights"))
        .def("sigma", &RadialMeasure::sigma, py::arg("r"))
        .def("total_mass", &RadialMeasure::total_mass)
        .def("description", &RadialMeasure::description)
        .def("__repr__", [](const RadialMeasure& xi) { return "<xi " + xi.description() + ">"; });

    py::class_<Space, std::shared_ptr<Space>>(m, "Space")
        .def_property_readonly("name", &Space::name)
        .def_property_readonly("dim", &Space::dim)
        .def_property_readonly("diameter", &Space::diameter)
        .def_property_readonly("distance_invariant", &Space::distance_invariant)
        .def_property_readonly("finite", &Space::finite)
        .def("metric", &Space::metric, py::arg("x"), py::arg("y"))
        .def(
            "ball_volume",
            [](const Space& s, const Point& y, double r, long samples, std::uint64_t seed) {
                return estimate_to_py(s.ball_volume(y, r, {samples, seed}));
            },
            py::arg("y"), py::arg("r"), py::arg("samples") = 100000, py::arg("seed") = 1)
        .def(
            "sample",
            [](const Space& s, std::size_t n, std::uint64_t seed) {
                return sample_iid(s, n, seed).points;
            },
            py::arg("n"), py::arg("seed") = 1)
        .def(
            "lattice",
            [](const Space& s, std::size_t n) { return lattice_points(s, n).points; },
            py::arg("n"))
        .def(
            "mean_distance",
            [](const Space& s, long samples, std::uint64_t seed) {
                return estimate_to_py(
                    mean_distance(s, {MeanDistanceOpts::Mode::Auto, samples, seed}));
            },
            py::arg("samples") = 100000, py::arg("seed") = 1)
        .def("default_xi", [](const Space& s) { return default_xi(s); })
        .def("sigma_eval",
             [](const Space& s, const RadialMeasure& xi, double r) {
                 return sigma_eval(xi, r, s.diameter());
             })
        .def("__repr__", [](const Space& s) { return "<space " + s.name() + ">"; });

    m.def(
        "make_space",
        [](const std::string& name, const std::string& density) {
            return std::const_pointer_cast<Space>(make_space(SpaceSpec{name, density}));
        },
        py::arg("name"), py::arg("density") = "");
    m.def("list_spaces", [] {
        py::list out;
        for (const auto& info : list_spaces()) {
            py::dict d;
            d["name"] = info.name;
            d["dim"] = info.dim;
            d["diameter"] = info.diameter;
            d["distance_invariant"] = info.distance_invariant;
            d["rectifiable"] = info.rectifiable;
            out.append(d);
        }
        return out;
    });

    m.def(
        "sum_distances",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts) {
            return sum_distances(*space, points_from_py(space, pts));
        },
        py::arg("space"), py::arg("points"));
    m.def(
        "local_discrepancy",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts, const Point& y,
           double r) { return local_discrepancy(*space, points_from_py(space, pts), y, r); },
        py::arg("space"), py::arg("points"), py::arg("y"), py::arg("r"));
    m.def(
        "l2_discrepancy_r",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts, double r,
           const std::string& mode, long samples, std::uint64_t seed) {
            return estimate_to_py(l2_discrepancy_r(
                *space, points_from_py(space, pts), r,
                mode == "kernel" ? L2Mode::Kernel : L2Mode::Integral, {samples, seed}));
        },
        py::arg("space"), py::arg("points"), py::arg("r"), py::arg("mode") = "integral",
        py::arg("samples") = 100000, py::arg("seed") = 1);
    m.def(
        "l2_discrepancy_xi",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts,
           const RadialMeasure& xi, long samples, std::uint64_t seed) {
            return estimate_to_py(
                l2_discrepancy_xi(*space, points_from_py(space, pts), xi, {samples, seed}));
        },
        py::arg("space"), py::arg("points"), py::arg("xi"), py::arg("samples") = 100000,
        py::arg("seed") = 1);
    m.def(
        "symdiff_metric_r",
        [](std::shared_ptr<const Space> space, const Point& y1, const Point& y2, double r,
           long samples, std::uint64_t seed) {
            return estimate_to_py(symdiff_metric_r(*space, y1, y2, r, {samples, seed}));
        },
        py::arg("space"), py::arg("y1"), py::arg("y2"), py::arg("r"),
        py::arg("samples") = 100000, py::arg("seed") = 1);
    m.def(
        "symdiff_metric_xi",
        [](std::shared_ptr<const Space> space, const RadialMeasure& xi, const Point& y1,
           const Point& y2, const std::string& mode, long samples, std::uint64_t seed) {
            return estimate_to_py(symdiff_metric_xi(
                *space, xi, y1, y2,
                mode == "direct" ? SymdiffMode::Direct : SymdiffMode::SigmaForm,
                {samples, seed}));
        },
        py::arg("space"), py::arg("xi"), py::arg("y1"), py::arg("y2"),
        py::arg("mode") = "sigma-form", py::arg("samples") = 100000, py::arg("seed") = 1);
    m.def(
        "mean_rho_star_xi",
        [](std::shared_ptr<const Space> space, const RadialMeasure& xi, long samples,
           std::uint64_t seed) {
            return estimate_to_py(mean_rho_star_xi(*space, xi, {samples, seed}));
        },
        py::arg("space"), py::arg("xi"), py::arg("samples") = 100000, py::arg("seed") = 1);
    m.def(
        "discrepancy_report",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts,
           const RadialMeasure& xi, long samples, std::uint64_t seed) {
            return json_to_py(to_json(compute_discrepancy_report(
                *space, points_from_py(space, pts), xi, {samples, seed})));
        },
        py::arg("space"), py::arg("points"), py::arg("xi"), py::arg("samples") = 100000,
        py::arg("seed") = 1);

    m.def(
        "build_box_partition",
        [](int dim, long n, const std::string& density, const std::string& strategy) {
            auto nu = std::make_shared<CubeMeasure>(CubeMeasure::named(density, dim));
            return json_to_py(to_json(build_box_partition(
                nu, n,
                strategy == "balanced" ? OccupancyStrategy::Balanced
                                       : OccupancyStrategy::Lexicographic)));
        },
        py::arg("dim"), py::arg("n"), py::arg("density") = "uniform",
        py::arg("strategy") = "lexicographic");
    m.def(
        "equal_measure_partition",
        [](std::shared_ptr<const Space> space, long n, const std::string& strategy,
           const std::string& mode, std::uint64_t seed) {
            return json_to_py(to_json(equal_measure_partition(
                space, n,
                strategy == "balanced" ? OccupancyStrategy::Balanced
                                       : OccupancyStrategy::Lexicographic,
                mode == "measured" ? DiameterMode::MeasuredSampling
                                   : DiameterMode::LipschitzBound,
                PushforwardOpts{64, seed})));
        },
        py::arg("space"), py::arg("n"), py::arg("strategy") = "lexicographic",
        py::arg("mode") = "lipschitz", py::arg("seed") = 1);

    m.def(
        "check_distance_invariance",
        [](std::shared_ptr<const Space> space, std::uint64_t seed) {
            auto chk = check_distance_invariance(*space, 8, 6, seed);
            py::dict d;
            d["invariant"] = chk.invariant;
            d["max_deviation"] = chk.max_deviation;
            d["tolerance"] = chk.tolerance;
            return d;
        },
        py::arg("space"), py::arg("seed") = 1);
    m.def(
        "exact_invariance_defect",
        [](std::shared_ptr<const Space> space, const std::vector<Point>& pts,
           const std::string& xi_spec, double xi_lo, double xi_hi) {
            RadialMeasure xi = xi_from_spec(*space, xi_spec, xi_lo, xi_hi);
            InvarianceOutcome out =
                exact_invariance_defect(*space, points_from_py(space, pts), xi);
            py::dict d;
            d["defect"] = out.defect;
            d["lhs"] = out.lhs;
            d["rhs"] = out.rhs;
            d["tolerance"] = out.tolerance;
            d["exact_zero"] = out.exact_zero;
            d["mode"] = out.mode;
            return d;
        },
        py::arg("space"), py::arg("points"), py::arg("xi") = "default", py::arg("xi_lo") = 0.0,
        py::arg("xi_hi") = -1.0);
    m.def(
        "probabilistic_invariance_check",
        [](std::shared_ptr<const Space> space, long n, const std::string& xi_spec, long trials,
           std::uint64_t seed, int threads) {
            RadialMeasure xi = xi_from_spec(*space, xi_spec, 0.0, -1.0);
            OmegaSampler sampler(equal_measure_partition(space, n));
            TrialOpts topts;
            topts.threads = threads;
            return json_to_py(
                to_json(probabilistic_invariance_check(sampler, xi, trials, seed, topts)));
        },
        py::arg("space"), py::arg("n"), py::arg("xi") = "default", py::arg("trials") = 1000,
        py::arg("seed") = 1, py::arg("threads") = 0);
    m.def(
        "bound_report",
        [](std::shared_ptr<const Space> space, long n, const std::string& xi_spec, long trials,
           std::uint64_t seed, int threads) {
            RadialMeasure xi = xi_from_spec(*space, xi_spec, 0.0, -1.0);
            OmegaSampler sampler(equal_measure_partition(space, n));
            TrialOpts topts;
            topts.threads = threads;
            return json_to_py(to_json(bound_report(sampler, xi, trials, seed, topts)));
        },
        py::arg("space"), py::arg("n"), py::arg("xi") = "default", py::arg("trials") = 1000,
        py::arg("seed") = 1, py::arg("threads") = 0);
    m.def(
        "lipschitz_check_rho_star",
        [](std::shared_ptr<const Space> space, const std::string& xi_spec, long pairs,
           std::uint64_t seed) {
            RadialMeasure xi = xi_from_spec(*space, xi_spec, 0.0, -1.0);
            LipschitzCheck chk = lipschitz_check_rho_star(*space, xi, pairs, seed);
            py::dict d;
            d["max_ratio"] = chk.max_ratio;
            d["c0"] = chk.c0;
            d["pairs"] = chk.pairs;
            return d;
        },
        py::arg("space"), py::arg("xi") = "default", py::arg("pairs") = 1000,
        py::arg("seed") = 1);
}
