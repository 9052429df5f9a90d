#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "bellopt/bell_expression.hpp"
#include "bellopt/chain.hpp"
#include "bellopt/seesaw.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::string fmt15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

// json stores full double precision; round through 15 significant digits for
// stable textual output
double round15(double v) { return std::stod(fmt15(v)); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bellopt::BellExpression load_expression(const std::string& spec) {
    if (spec == "chsh") return bellopt::builtin_chsh();
    if (spec == "i3322") return bellopt::builtin_i3322();
    return bellopt::parse_bell_expression_file(spec);
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << text;
    }
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(round15(M(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json matrix_to_json(const Eigen::MatrixXcd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back({round15(M(i, j).real()), round15(M(i, j).imag())});
        rows.push_back(row);
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round15(v(i)));
    return arr;
}

json vector_to_json(const Eigen::VectorXcd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back({round15(v(i).real()), round15(v(i).imag())});
    return arr;
}

struct OptimizeArgs {
    std::string ineq;
    int dim = 0;
    std::string field = "real";
    int restarts = 100;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double tol = 1e-12;
    int max_cycles = 10000;
    std::string early_stop;
    int jobs = 1;
    std::string out;
    std::string format = "json";
};

template <class Scalar>
int run_optimize_typed(const bellopt::BellExpression& expr, const OptimizeArgs& a,
                       const bellopt::SeesawConfig& cfg, const std::string& digest) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = bellopt::run_seesaw<Scalar>(expr, cfg);
    const double residual = bellopt::stationarity_residual(expr, result.A_ops,
                                                           result.B_ops, result.state);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (a.format == "csv") {
        std::ostringstream csv;
        csv << "value,dim,field,restarts,cycles,converged,restart_index,residual,seed\n";
        csv << fmt15(result.value) << ',' << a.dim << ',' << a.field << ',' << a.restarts
            << ',' << result.cycles_used << ',' << (result.converged ? 1 : 0) << ','
            << result.restart_index << ',' << fmt15(residual) << ',' << cfg.seed << '\n';
        write_output(csv.str(), a.out);
    } else {
        json rec;
        rec["command"] = "optimize";
        rec["input_digest"] = digest;
        rec["config"] = {{"ineq", a.ineq},
                         {"dim", a.dim},
                         {"field", a.field},
                         {"restarts", a.restarts},
                         {"seed", cfg.seed},
                         {"tol", cfg.tol_value},
                         {"max_cycles", cfg.max_cycles},
                         {"jobs", a.jobs}};
        if (cfg.early_stop)
            rec["config"]["early_stop"] = {{"threshold", cfg.early_stop->threshold},
                                           {"count", cfg.early_stop->count},
                                           {"grace_cycles", cfg.early_stop->grace_cycles}};
        rec["value"] = round15(result.value);
        rec["cycles_used"] = result.cycles_used;
        rec["restart_index"] = result.restart_index;
        rec["converged"] = result.converged;
        rec["residual"] = round15(residual);
        json a_ops = json::array(), b_ops = json::array();
        for (const auto& P : result.A_ops) a_ops.push_back(matrix_to_json(P));
        for (const auto& P : result.B_ops) b_ops.push_back(matrix_to_json(P));
        rec["A_ops"] = a_ops;
        rec["B_ops"] = b_ops;
        rec["state"] = vector_to_json(result.state);
        rec["wall_time_s"] = wall;
        write_output(rec.dump(2) + "\n", a.out);
    }
    return 0;
}

int run_optimize(const OptimizeArgs& a) {
    const auto expr = load_expression(a.ineq);
    bellopt::SeesawConfig cfg;
    cfg.dim = a.dim;
    cfg.tol_value = a.tol;
    cfg.max_cycles = a.max_cycles;
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    cfg.jobs = a.jobs;
    if (!a.early_stop.empty()) {
        bellopt::EarlyStopRule rule;
        char comma;
        std::istringstream ss(a.early_stop);
        if (!(ss >> rule.threshold >> comma >> rule.count >> comma >> rule.grace_cycles))
            throw CLI::ValidationError("--early-stop expects 'threshold,count,grace'");
        cfg.early_stop = rule;
    }
    const std::string digest = hex64(fnv1a(bellopt::serialize(expr)));
    if (a.field == "complex")
        return run_optimize_typed<std::complex<double>>(expr, a, cfg, digest);
    return run_optimize_typed<double>(expr, a, cfg, digest);
}

struct I3322Args {
    int dim = 0;
    std::string sweep;
    std::string branch = "both";
    int split = -1;
    int pin_zero = -1;
    double tol = 1e-13;
    int max_cycles = 50000;
    int jobs = 1;
    bool dump = false;
    std::string out;
    std::string format = "csv";
};

const char* branch_name(bellopt::chain::Branch b) {
    return b == bellopt::chain::Branch::zero ? "0" : "-1";
}

int run_i3322(const I3322Args& a) {
    using namespace bellopt::chain;
    std::vector<int> ns;
    if (!a.sweep.empty()) {
        int lo = 0, hi = 0, step = 1;
        char c1 = 0, c2 = 0;
        std::istringstream ss(a.sweep);
        ss >> lo >> c1 >> hi;
        if (ss >> c2 >> step) {
            if (c2 != ':') throw CLI::ValidationError("--sweep expects 'a:b' or 'a:b:step'");
        }
        if (!lo || c1 != ':' || hi < lo || step < 1)
            throw CLI::ValidationError("--sweep expects 'a:b' or 'a:b:step'");
        for (int n = lo; n <= hi; n += step) ns.push_back(n);
    } else if (a.dim >= 2) {
        ns.push_back(a.dim);
    } else {
        throw CLI::ValidationError("either --dim (>= 2) or --sweep is required");
    }

    std::vector<Branch> branches;
    if (a.branch == "0")
        branches = {Branch::zero};
    else if (a.branch == "-1")
        branches = {Branch::minus_one};
    else if (a.branch == "both")
        branches = {Branch::zero, Branch::minus_one};
    else
        throw CLI::ValidationError("--branch must be 0, -1 or both");

    ChainOptions options;
    options.tol = a.tol;
    options.max_cycles = a.max_cycles;
    if (a.split >= 0) options.split = a.split;
    if (a.pin_zero >= 0) options.pin_zero = a.pin_zero;

    // --dump needs the full parameter vectors, so rerun per cell
    if (a.dump) {
        json cells = json::array();
        for (int n : ns)
            for (Branch b : branches) {
                const auto r = run_chain(n, b, options);
                json cell;
                cell["n"] = n;
                cell["branch"] = branch_name(b);
                cell["value"] = round15(r.value);
                cell["distance"] = round15(kI3322UpperBound - r.value);
                cell["iterations"] = r.iterations;
                cell["converged"] = r.converged;
                cell["sign_change_index"] = r.sign_change_index;
                cell["c"] = vector_to_json(r.params.c);
                cell["lambda"] = vector_to_json(r.params.lambda);
                cells.push_back(cell);
            }
        write_output(cells.dump(2) + "\n", a.out);
        return 0;
    }

    const auto rows = sweep(ns, branches, options, a.jobs);
    if (a.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"n", r.n},
                           {"branch", branch_name(r.branch)},
                           {"value", round15(r.value)},
                           {"distance", round15(r.distance)},
                           {"iterations", r.iterations},
                           {"converged", r.converged},
                           {"sign_change_index", r.sign_change_index}});
        write_output(arr.dump(2) + "\n", a.out);
    } else {
        std::ostringstream csv;
        csv << "n,branch,value,distance,iterations,converged,sign_change_index,seed\n";
        for (const auto& r : rows)
            csv << r.n << ',' << branch_name(r.branch) << ',' << fmt15(r.value) << ','
                << fmt15(r.distance) << ',' << r.iterations << ','
                << (r.converged ? 1 : 0) << ',' << r.sign_change_index << ",0\n";
        write_output(csv.str(), a.out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lower bounds on quantum violations of two-outcome Bell inequalities"};
    app.require_subcommand(1);

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand(
        "optimize", "See-saw optimization of an inequality at fixed local dimension");
    optimize->add_option("--ineq", opt.ineq, "Inequality file, or 'chsh' / 'i3322'")
        ->required();
    optimize->add_option("--dim", opt.dim, "Local Hilbert space dimension")
        ->required()
        ->check(CLI::PositiveNumber);
    optimize->add_option("--field", opt.field, "Scalar field (real or complex)")
        ->check(CLI::IsMember({"real", "complex"}))
        ->capture_default_str();
    optimize->add_option("--restarts", opt.restarts)->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* seed_opt = optimize->add_option("--seed", opt.seed, "Base RNG seed");
    optimize->add_option("--tol", opt.tol, "Per-cycle convergence threshold")
        ->capture_default_str();
    optimize->add_option("--max-cycles", opt.max_cycles)->capture_default_str();
    optimize->add_option("--early-stop", opt.early_stop,
                         "Early-stop rule 'threshold,count,grace'");
    optimize->add_option("--jobs", opt.jobs, "Parallel restarts")->capture_default_str();
    optimize->add_option("--out", opt.out, "Output path (default stdout)");
    optimize->add_option("--format", opt.format)->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    I3322Args i3;
    auto* i3322 = app.add_subcommand(
        "i3322", "Block-diagonal chain solver for the I3322 inequality");
    i3322->add_option("--dim", i3.dim, "Local dimension (>= 2)");
    i3322->add_option("--sweep", i3.sweep, "Dimension range 'a:b' or 'a:b:step'");
    i3322->add_option("--branch", i3.branch, "c_n branch: 0, -1 or both")
        ->capture_default_str();
    i3322->add_option("--split", i3.split, "Initial sign-change split index");
    i3322->add_option("--pin-zero", i3.pin_zero, "Force c_i = 0 at this index");
    i3322->add_option("--tol", i3.tol)->capture_default_str();
    i3322->add_option("--max-cycles", i3.max_cycles)->capture_default_str();
    i3322->add_option("--jobs", i3.jobs, "Parallel sweep cells")->capture_default_str();
    i3322->add_flag("--dump", i3.dump, "Emit c and lambda profiles (JSON)");
    i3322->add_option("--out", i3.out, "Output path (default stdout)");
    i3322->add_option("--format", i3.format)->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    std::string classical_ineq;
    auto* classical = app.add_subcommand(
        "classical", "Exact classical bound by deterministic-strategy enumeration");
    classical->add_option("--ineq", classical_ineq, "Inequality file, or 'chsh' / 'i3322'")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*optimize) {
            opt.seed_given = seed_opt->count() > 0;
            if (!opt.seed_given) opt.seed = std::random_device{}();
            return run_optimize(opt);
        }
        if (*i3322) return run_i3322(i3);
        if (*classical) {
            const auto expr = load_expression(classical_ineq);
            std::cout << fmt15(bellopt::classical_bound(expr)) << "\n";
            return 0;
        }
    } catch (const bellopt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::length_error& e) {
        std::cerr << "limit exceeded: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
