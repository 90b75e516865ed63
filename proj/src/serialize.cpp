#include "metricpoints/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mps {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Json to_json(const Estimate& e) {
    return Json{{"value", e.value}, {"stderr", e.stderr_}, {"method", e.method}};
}

Json to_json(const PointSet& pts) {
    Json j;
    j["space"] = pts.space_name;
    j["provenance"] = provenance_name(pts.provenance);
    j["seed"] = pts.seed;
    j["n"] = pts.size();
    j["points"] = pts.points;
    return j;
}

Json to_json(const BoxPartition& part) {
    Json j;
    j["kind"] = "box";
    j["d"] = part.dim;
    j["k"] = part.k;
    j["n"] = part.n;
    j["strategy"] = strategy_name(part.strategy);
    j["measure"] = part.measure->description();
    j["avg_diameter"] = part.avg_diameter();
    j["max_diameter"] = part.max_diameter();
    j["diameter_bound"] = part.diameter_bound();
    j["bound_satisfied"] = part.avg_diameter() <= part.diameter_bound() + 1e-12;
    Json boxes = Json::array();
    for (const auto& b : part.boxes) {
        Json jb;
        jb["alpha"] = b.alpha;
        Json intervals = Json::array();
        for (std::size_t a = 0; a < b.lo.size(); ++a)
            intervals.push_back(Json::array({b.lo[a], b.hi[a]}));
        jb["intervals"] = intervals;
        jb["measure"] = b.measure;
        jb["diameter"] = b.euclid_diameter;
        boxes.push_back(std::move(jb));
    }
    j["boxes"] = std::move(boxes);
    return j;
}

Json to_json(const SpacePartition& part) {
    Json j;
    j["kind"] = "space";
    j["space"] = part.space->name();
    j["n"] = part.size();
    if (part.base_measure) j["measure"] = part.base_measure->description();
    j["diameter_mode"] = diameter_mode_name(part.diameter_mode);
    j["avg_diameter"] = part.avg_diameter();
    j["max_diameter"] = part.max_diameter();
    Json cells = Json::array();
    for (const auto& c : part.cells) {
        Json jc;
        if (!c.alpha.empty()) jc["alpha"] = c.alpha;
        if (!c.lo.empty()) {
            Json intervals = Json::array();
            for (std::size_t a = 0; a < c.lo.size(); ++a)
                intervals.push_back(Json::array({c.lo[a], c.hi[a]}));
            jc["intervals"] = intervals;
        }
        if (!c.indices.empty()) jc["indices"] = c.indices;
        jc["measure"] = c.measure;
        jc["diameter"] = c.diameter;
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j;
}

Json to_json(const DiscrepancyReport& rep) {
    Json j;
    j["space"] = rep.space_name;
    j["xi"] = rep.xi_description;
    j["n"] = rep.n;
    j["seed"] = rep.seed;
    j["rho_sum"] = rep.rho_sum;
    j["lambda_xi"] = to_json(rep.lambda_xi);
    j["rho_star_sum"] = to_json(rep.rho_star_sum);
    j["mean_rho"] = to_json(rep.mean_rho);
    j["mean_rho_star"] = to_json(rep.mean_rho_star);
    return j;
}

Json to_json(const InvarianceReport& rep) {
    Json j;
    j["space"] = rep.space_name;
    j["xi"] = rep.xi_description;
    j["n"] = rep.n;
    j["trials"] = rep.trials;
    j["seed"] = rep.seed;
    j["mode"] = rep.mode;
    j["lambda_mean"] = to_json(rep.lambda_mean);
    j["rho_star_mean"] = to_json(rep.rho_star_mean);
    j["lhs"] = to_json(rep.lhs);
    j["rhs"] = to_json(rep.rhs);
    j["defect"] = rep.defect;
    j["combined_se"] = rep.combined_se;
    if (rep.exact_config_defect) j["exact_config_defect"] = *rep.exact_config_defect;
    return j;
}

Json to_json(const BoundReport& rep) {
    Json j;
    j["space"] = rep.space_name;
    j["xi"] = rep.xi_description;
    j["n"] = rep.n;
    j["d"] = rep.d;
    j["trials"] = rep.trials;
    j["seed"] = rep.seed;
    j["mean_rho"] = to_json(rep.mean_rho);
    j["norm1"] = rep.norm1;
    j["norm_inf"] = rep.norm_inf;
    j["rho_lower_bound"] = rep.rho_lower_bound;
    j["rho_mc_mean"] = to_json(rep.rho_mc_mean);
    j["rho_best"] = rep.rho_best;
    if (rep.c0) {
        j["c0"] = *rep.c0;
        j["lambda_upper_bound"] = *rep.lambda_upper_bound;
    }
    j["lambda_mc_mean"] = to_json(rep.lambda_mc_mean);
    j["rho_star_mc_mean"] = to_json(rep.rho_star_mc_mean);
    j["invariance_defect"] = rep.invariance_defect;
    j["invariance_ci"] = rep.invariance_ci;
    if (rep.lipschitz) j["lipschitz"] = *rep.lipschitz;
    if (rep.apriori_rho_lower) j["apriori_rho_lower"] = *rep.apriori_rho_lower;
    if (rep.apriori_lambda_upper) j["apriori_lambda_upper"] = *rep.apriori_lambda_upper;
    j["qn_rho"] = to_json(rep.qn_rho);
    j["qn_bound"] = rep.qn_bound;
    return j;
}

Json record_envelope(const std::string& command, std::uint64_t seed, const Json& config,
                     Json payload) {
    Json j;
    j["schema_version"] = 1;
    j["artifact_version"] = version();
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["result"] = std::move(payload);
    return j;
}

std::string bounds_sweep_csv_header() {
    return "space,d,n,trials,seed,mean_rho,norm1,norm_inf,rho_lower_bound,rho_mc_mean,"
           "rho_mc_se,rho_best,c0,lambda_upper_bound,lambda_mc_mean,lambda_mc_se,"
           "apriori_rho_lower,apriori_lambda_upper,qn_rho,qn_se,qn_bound,defect,defect_ci";
}

std::string bounds_sweep_csv_row(const BoundReport& rep) {
    std::ostringstream os;
    os << rep.space_name << ',' << rep.d << ',' << rep.n << ',' << rep.trials << ',' << rep.seed
       << ',' << format_double(rep.mean_rho.value) << ',' << format_double(rep.norm1) << ','
       << format_double(rep.norm_inf) << ',' << format_double(rep.rho_lower_bound) << ','
       << format_double(rep.rho_mc_mean.value) << ',' << format_double(rep.rho_mc_mean.stderr_)
       << ',' << format_double(rep.rho_best) << ',';
    if (rep.c0) os << format_double(*rep.c0);
    os << ',';
    if (rep.lambda_upper_bound) os << format_double(*rep.lambda_upper_bound);
    os << ',' << format_double(rep.lambda_mc_mean.value) << ','
       << format_double(rep.lambda_mc_mean.stderr_) << ',';
    if (rep.apriori_rho_lower) os << format_double(*rep.apriori_rho_lower);
    os << ',';
    if (rep.apriori_lambda_upper) os << format_double(*rep.apriori_lambda_upper);
    os << ',' << format_double(rep.qn_rho.value) << ',' << format_double(rep.qn_rho.stderr_)
       << ',' << format_double(rep.qn_bound) << ',' << format_double(rep.invariance_defect)
       << ',' << format_double(rep.invariance_ci);
    return os.str();
}

std::string discrepancy_csv_header() {
    return "space,n,seed,rho_sum,lambda_xi,lambda_xi_se,lambda_method,rho_star_sum,"
           "rho_star_se,mean_rho,mean_rho_se,mean_rho_star,mean_rho_star_se";
}

std::string discrepancy_csv_row(const DiscrepancyReport& rep) {
    std::ostringstream os;
    os << rep.space_name << ',' << rep.n << ',' << rep.seed << ','
       << format_double(rep.rho_sum) << ',' << format_double(rep.lambda_xi.value) << ','
       << format_double(rep.lambda_xi.stderr_) << ',' << rep.lambda_xi.method << ','
       << format_double(rep.rho_star_sum.value) << ',' << format_double(rep.rho_star_sum.stderr_)
       << ',' << format_double(rep.mean_rho.value) << ',' << format_double(rep.mean_rho.stderr_)
       << ',' << format_double(rep.mean_rho_star.value) << ','
       << format_double(rep.mean_rho_star.stderr_);
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace mps
