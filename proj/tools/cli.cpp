#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "isingclt/bound.hpp"
#include "isingclt/embedding.hpp"
#include "isingclt/errors.hpp"
#include "isingclt/exact.hpp"
#include "isingclt/glauber.hpp"
#include "isingclt/lattice.hpp"
#include "isingclt/model_io.hpp"
#include "isingclt/parallel.hpp"
#include "isingclt/wasserstein.hpp"
#include "report.hpp"

namespace isingclt::cli {
namespace {

double parse_double(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) throw ValidationError("not a number: '" + s + "'");
    return x;
}

std::size_t parse_index(const std::string& s) {
    std::size_t x = 0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) throw ValidationError("not a site index: '" + s + "'");
    return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) parts.push_back(cur);
    return parts;
}

/// "3:+1,5:-1"
std::vector<Pin> parse_pins(const std::string& s) {
    std::vector<Pin> pins;
    for (const std::string& item : split(s, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("pin '" + item + "' is not of the form site:+1 or site:-1");
        const std::string spin = item.substr(colon + 1);
        Pin p;
        p.site = parse_index(item.substr(0, colon));
        if (spin == "+1" || spin == "1" || spin == "+") p.spin = 1;
        else if (spin == "-1" || spin == "-") p.spin = -1;
        else throw ValidationError("pin '" + item + "' has a spin other than +1 / -1");
        pins.push_back(p);
    }
    return pins;
}

/// "uniform", "e<i>" or a comma-separated vector.
DirectionVector resolve_theta(const std::string& spec, bool normalize, std::size_t n) {
    if (spec == "uniform") return DirectionVector::uniform(n);
    if (spec.size() > 1 && spec[0] == 'e') {
        const std::size_t i = parse_index(spec.substr(1));
        if (i >= n) throw ValidationError("theta basis index out of range");
        return DirectionVector::basis(n, i);
    }
    const auto parts = split(spec, ',');
    if (parts.size() != n)
        throw ValidationError("theta has " + std::to_string(parts.size()) + " entries, model has " +
                              std::to_string(n) + " sites");
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
    return normalize ? DirectionVector::normalized(v) : DirectionVector(v);
}

std::string spins_string(const SpinConfig& x) {
    std::string s(x.size(), '+');
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < 0) s[i] = '-';
    return s;
}

Cell opt_cell(const std::optional<double>& x) { return x ? Cell{*x} : Cell{}; }
Cell idx(std::size_t i) { return Cell{static_cast<std::uint64_t>(i)}; }

struct Globals {
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    std::size_t enum_cap = kDefaultEnumerationCap;
    std::size_t threads = 0;

    EnumerationOptions enumeration() const { return EnumerationOptions{enum_cap}; }
};

struct ModelArgs {
    std::string path;
    std::string inline_json;
    std::string generate;
    std::size_t size = 0;
    double beta = 0.0;
    double field = 0.0;
    double alpha = 0.5;
    std::size_t matchings = 3;
    std::uint64_t model_seed = 1;
    bool periodic = false;

    void attach(CLI::App* app) {
        app->add_option("--model", path, "Model file (JSON)");
        app->add_option("--inline", inline_json, "Model given inline as JSON text");
        app->add_option("--generate", generate, "Built-in model: product, chain or dobrushin")
            ->check(CLI::IsMember({"product", "chain", "dobrushin"}));
        app->add_option("--size", size, "Number of sites for --generate");
        app->add_option("--beta", beta, "Nearest-neighbour coupling for --generate chain");
        app->add_option("--field", field, "Constant external field for --generate");
        app->add_option("--alpha", alpha, "Row sum for --generate dobrushin");
        app->add_option("--matchings", matchings, "Random perfect matchings for --generate dobrushin");
        app->add_option("--model-seed", model_seed, "Seed of the random graph for --generate dobrushin");
        app->add_flag("--periodic", periodic, "Periodic boundary for --generate chain");
    }

    IsingModel load() const {
        const int sources = int(!path.empty()) + int(!inline_json.empty()) + int(!generate.empty());
        if (sources != 1) throw ValidationError("give exactly one of --model, --inline, --generate");
        if (!path.empty()) return read_model_file(path);
        if (!inline_json.empty()) return parse_model(inline_json);
        if (size == 0) throw ValidationError("--generate needs --size > 0");
        if (generate == "product") {
            const auto n = static_cast<Eigen::Index>(size);
            IsingModel m = validate_model(Matrix::Zero(n, n), Vector::Constant(n, field));
            m.set_label("product");
            return m;
        }
        if (generate == "chain") {
            IsingModel m = build_box_model(chain_spec(size, beta, field, periodic ? Boundary::Periodic : Boundary::Free));
            m.set_label(periodic ? "periodic-chain" : "chain");
            return m;
        }
        return dobrushin_ferromagnet(size, alpha, matchings, field, model_seed);
    }
};

struct ThetaArgs {
    std::string theta = "uniform";
    bool normalize = false;

    void attach(CLI::App* app) {
        app->add_option("--theta", theta, "Direction: uniform, e<i>, or comma-separated entries");
        app->add_flag("--normalize", normalize, "Scale a given --theta to unit length");
    }
    DirectionVector resolve(std::size_t n) const { return resolve_theta(theta, normalize, n); }
};

struct ChainArgs {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t record_every = 1;
    std::size_t batches = 32;
    std::string pins;

    void attach(CLI::App* app, std::uint64_t default_steps, std::uint64_t default_burn_in, bool with_pins = true) {
        steps = default_steps;
        burn_in = default_burn_in;
        app->add_option("--steps", steps, "Single-site updates, burn-in included");
        app->add_option("--burn-in", burn_in, "Updates discarded before recording");
        app->add_option("--record-every", record_every, "Record one sample every this many updates");
        app->add_option("--batches", batches, "Batches for batch-means standard errors");
        if (with_pins) app->add_option("--pins", pins, "Pinned spins, e.g. 3:+1,5:-1");
    }

    ChainConfig make(std::uint64_t seed) const {
        ChainConfig c;
        c.steps = steps;
        c.burn_in = burn_in;
        c.record_every = record_every;
        c.batches = batches;
        c.seed = seed;
        c.pins = parse_pins(pins);
        return c;
    }
};

using Handler = std::function<void(Report&)>;

class Cli {
public:
    Cli() : app_("Exact and Monte Carlo checks of Wasserstein CLT bounds for Ising projections", "ising-clt") {
        app_.option_defaults()->always_capture_default();
        app_.set_version_flag("--version", version_line());
        app_.set_config("--config", "", "TOML file with option values; [subcommand] sections allowed");
        app_.require_subcommand(1);
        app_.fallthrough();
        app_.add_option("--seed", g_.seed, "Root seed of every random stream");
        app_.add_option("--out", g_.out, "Write results to this file instead of stdout");
        app_.add_option("--format", g_.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        app_.add_option("--enum-cap", g_.enum_cap, "Largest n for exact enumeration");
        app_.add_option("--threads", g_.threads, "Worker threads (default: ISINGCLT_THREADS or 1)");

        setup_exact_stats();
        setup_spectral();
        setup_dobrushin();
        setup_bound();
        setup_w2();
        setup_sample();
        setup_couple();
        setup_embed();
        setup_lattice_decay();
        setup_clt_table();
        setup_make_model();
    }

    int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
        std::reverse(args.begin(), args.end());
        try {
            app_.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app_.exit(e, out, err);
            return code == 0 ? kExitOk : kExitInvalid;
        }
        const CLI::App* sub = app_.get_subcommands().front();
        try {
            if (g_.threads > 0) set_worker_count(g_.threads);
            const Format format = parse_format(g_.format);
            Json config;
            config["command"] = sub->get_name();
            echo_options(app_, config);
            echo_options(*sub, config);

            std::ostringstream buffer;
            if (sub->get_name() == "make-model") {
                buffer << model_to_json(model_args_.at("make-model").load()) << '\n';
            } else {
                Report report(sub->get_name(), config);
                handlers_.at(sub->get_name())(report);
                report.write(buffer, format);
            }
            if (g_.out.empty()) {
                out << buffer.str();
            } else {
                std::ofstream file(g_.out, std::ios::binary);
                if (!file) throw ValidationError("cannot open output file '" + g_.out + "'");
                file << buffer.str();
            }
            return kExitOk;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            return kExitInvalid;
        } catch (const std::exception& e) {
            err << "numerical failure: " << e.what() << '\n';
            return kExitNumerical;
        }
    }

private:
    static void echo_options(const CLI::App& app, Json& config) {
        static const std::set<std::string> skipped = {"help", "version", "config", "out", "threads"};
        for (const CLI::Option* opt : app.get_options()) {
            const std::string name = opt->get_single_name();
            if (name.empty() || skipped.contains(name)) continue;
            if (opt->get_expected_min() == 0) {
                config[name] = opt->count() > 0;
                continue;
            }
            std::string value;
            if (opt->count() > 0) {
                const auto& res = opt->results();
                for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
            } else {
                value = opt->get_default_str();
                std::erase_if(value, [](char c) { return c == '[' || c == ']' || c == '{' || c == '}' || c == ' '; });
            }
            config[name] = value;
        }
    }

    CLI::App* add(const std::string& name, const std::string& description, Handler h) {
        CLI::App* c = app_.add_subcommand(name, description);
        handlers_[name] = std::move(h);
        return c;
    }

    ModelArgs& model_for(CLI::App* c) {
        ModelArgs& m = model_args_[c->get_name()];
        m.attach(c);
        return m;
    }

    ThetaArgs& theta_for(CLI::App* c) {
        ThetaArgs& t = theta_args_[c->get_name()];
        t.attach(c);
        return t;
    }

    ChainArgs& chain_for(CLI::App* c, std::uint64_t steps, std::uint64_t burn_in, bool with_pins = true) {
        ChainArgs& ch = chain_args_[c->get_name()];
        ch.attach(c, steps, burn_in, with_pins);
        return ch;
    }

    void setup_exact_stats() {
        CLI::App* c = add("exact-stats", "Log-partition, moments and law of theta'X by exact enumeration",
                          [this](Report& r) { exact_stats(r); });
        model_for(c);
        theta_for(c);
        c->add_option("--merge-tol", exact_.merge_tol, "Atoms of theta'X closer than this are merged");
        c->add_flag("--no-pmf", exact_.no_pmf, "Skip the pmf table");
    }

    void exact_stats(Report& r) {
        const IsingModel m = model_args_.at("exact-stats").load();
        const DirectionVector th = theta_args_.at("exact-stats").resolve(m.size());
        const MomentSummary s = moments(m, th, g_.enumeration());
        Table& sum = r.table("summary", {"n", "log_partition", "mu_n", "sigma2_n"});
        sum.add({idx(m.size()), s.log_partition, s.mu_n, s.sigma2_n});
        Table& sites = r.table("sites", {"site", "h", "mean", "cov_with_w"});
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            sites.add({idx(i), m.field(i), s.mean(ii), s.v(ii)});
        }
        Table& cov = r.table("covariance", {"i", "j", "cov"});
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i; j < m.size(); ++j)
                cov.add({idx(i), idx(j), s.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
        if (exact_.no_pmf) return;
        const ProjectionPmf pmf = exact_pmf_of_projection(m, th, exact_.merge_tol, g_.enumeration());
        Table& p = r.table("pmf", {"value", "prob"});
        for (const Atom& a : pmf.atoms) p.add({a.value, a.prob});
    }

    void setup_spectral() {
        CLI::App* c = add("spectral", "Extreme eigenvalues of A and the high-temperature margin",
                          [this](Report& r) { spectral(r); });
        model_for(c);
        c->add_option("--tolerance", spectral_.tolerance, "Lanczos convergence tolerance");
        c->add_option("--dense-limit", spectral_.dense_limit, "Dense eigensolver up to this size");
        c->add_option("--max-iterations", spectral_.max_iterations, "Lanczos iteration cap");
    }

    void spectral(Report& r) {
        const IsingModel m = model_args_.at("spectral").load();
        const SpectralReport s = spectral_report(m, spectral_);
        Table& t = r.table("spectral", {"n", "lambda_min", "lambda_max", "spread", "psd_shift", "high_temp_margin",
                                        "poincare_constant", "method", "iterations"});
        t.add({idx(m.size()), s.lambda_min, s.lambda_max, s.spread, s.psd_shift, s.high_temp_margin,
               opt_cell(s.poincare_constant), std::string(s.iterative ? "lanczos" : "dense"), idx(s.iterations)});
    }

    void setup_dobrushin() {
        CLI::App* c = add("dobrushin", "Dobrushin interdependence sums of the coupling matrix",
                          [this](Report& r) { dobrushin(r); });
        model_for(c);
    }

    void dobrushin(Report& r) {
        const IsingModel m = model_args_.at("dobrushin").load();
        const DobrushinReport d = dobrushin_report(m);
        Table& t = r.table("dobrushin", {"n", "alpha", "beta", "gamma", "ferromagnetic"});
        t.add({idx(m.size()), d.alpha, d.beta, d.gamma, m.is_ferromagnetic()});
        Table& sites = r.table("sites", {"site", "abs_row_sum", "tanh_col_sum"});
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            sites.add({idx(i), d.row_sums(ii), d.c_tanh.col(ii).sum()});
        }
    }

    void setup_bound() {
        CLI::App* c = add("bound", "Wasserstein bound: sup over fields, epsilon optimization, exact reference",
                          [this](Report& r) { bound(r); });
        model_for(c);
        theta_for(c);
        c->add_option("--strategy", bound_.strategy, "Sup strategy")
            ->check(CLI::IsMember({"uniform-scan", "grid", "multistart-ascent", "product-closed-form"}));
        c->add_option("--scan-min", bound_.sup.scan_min, "Uniform scan: smallest field");
        c->add_option("--scan-max", bound_.sup.scan_max, "Uniform scan: largest field");
        c->add_option("--scan-points", bound_.sup.scan_points, "Uniform scan: grid points");
        c->add_option("--starts", bound_.sup.starts, "Multistart: random starts");
        c->add_option("--start-range", bound_.sup.start_range, "Multistart: starts drawn from [-r, r]^n");
        c->add_option("--grid-file", bound_.grid_file, "Grid strategy: JSON array of field vectors");
        c->add_option("--epsilon", bound_.epsilons, "Extra epsilon values in (0, 1/2)")->delimiter(',');
        c->add_option("--eps-grid", bound_.eps_grid, "Evaluate at eps = k/(2(N+1)), k = 1..N");
        c->add_option("--cp", bound_.cp, "Poincare constant override; 0 means 1/(1 - spectral spread)");
        c->add_flag("--exact-w2", bound_.exact_w2, "Also compute the exact W2 of theta'X to its normal");
    }

    void bound(Report& r) {
        const IsingModel m = model_args_.at("bound").load();
        const DirectionVector th = theta_args_.at("bound").resolve(m.size());
        SupOptions so = bound_.sup;
        so.seed = g_.seed;
        so.enumeration = g_.enumeration();
        if (!bound_.grid_file.empty()) {
            std::ifstream in(bound_.grid_file);
            if (!in) throw ValidationError("cannot open grid file '" + bound_.grid_file + "'");
            Json doc;
            try {
                doc = Json::parse(in);
            } catch (const Json::exception& e) {
                throw ValidationError(std::string("grid file: ") + e.what());
            }
            if (!doc.is_array()) throw ValidationError("grid file must hold an array of field vectors");
            for (const Json& row : doc) {
                const auto vals = row.get<std::vector<double>>();
                so.grid.push_back(Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
            }
        }
        const SupResult sup = sup_over_fields(m, th, parse_sup_strategy(bound_.strategy), so);
        std::optional<double> cp_override;
        if (bound_.cp != 0.0) cp_override = bound_.cp;
        const double eps_probe = 0.25;
        const BoundReport base = theorem1_bound(m, eps_probe, sup.sup_estimate, cp_override);
        const double cp = base.poincare_constant;

        Table& st = r.table("sup", {"strategy", "sup_estimate", "sup_kind", "evaluations", "poincare_constant",
                                    "poincare_override"});
        st.add({to_string(sup.strategy), sup.sup_estimate, std::string(sup.exact ? "EXACT" : "LOWER-BOUND"), idx(sup.evaluations), cp, cp_override.has_value()});
        Table& field = r.table("field", {"site", "h"});
        for (std::size_t i = 0; i < m.size(); ++i) field.add({idx(i), sup.field(static_cast<Eigen::Index>(i))});

        Table& bt = r.table("bound", {"kind", "epsilon", "bound"});
        const EpsilonOptimum opt = optimize_epsilon(sup.sup_estimate, cp);
        bt.add({std::string("optimal"), opt.epsilon, opt.bound_value});
        for (std::size_t k = 1; k <= bound_.eps_grid; ++k) {
            const double eps = 0.5 * static_cast<double>(k) / static_cast<double>(bound_.eps_grid + 1);
            bt.add({std::string("grid"), eps, bound_value(eps, sup.sup_estimate, cp)});
        }
        for (double eps : bound_.epsilons)
            bt.add({std::string("given"), eps, theorem1_bound(m, eps, sup.sup_estimate, cp).bound_value});

        if (!bound_.exact_w2) return;
        const ProjectionPmf pmf = exact_pmf_of_projection(m, th, kDefaultMergeTolerance, g_.enumeration());
        const double var = pmf.variance();
        if (!(var > 0.0)) throw NumericalError("exact W2 reference: theta'X is degenerate");
        const double w2 = w2_discrete_vs_normal(pmf, NormalParams(pmf.mean(), std::sqrt(var)));
        Table& ref = r.table("reference", {"mu_n", "sigma2_n", "exact_w2", "below_optimal_bound"});
        ref.add({pmf.mean(), var, w2, w2 <= opt.bound_value});
    }

    void setup_w2() {
        CLI::App* c = add("w2", "2-Wasserstein distance to a normal law", [this](Report& r) { w2(r); });
        model_for(c);
        theta_for(c);
        c->add_flag("--coin", w2_.coin, "Self-test: fair +-1 coin against N(0, 1)");
        c->add_option("--normal", w2_.normal, "mean,sd of the first normal (normal-vs-normal mode)")
            ->delimiter(',')->expected(2);
        c->add_option("--vs", w2_.vs, "mean,sd of the reference normal")->delimiter(',')->expected(2);
        c->add_option("--samples", w2_.samples, "File of samples, one per line (empirical mode)");
    }

    void w2(Report& r) {
        Table& t = r.table("w2", {"mode", "w2", "ref_mean", "ref_sd"});
        auto ref_or = [&](double mean, double sd) {
            return w2_.vs.empty() ? NormalParams(mean, sd) : NormalParams(w2_.vs[0], w2_.vs[1]);
        };
        if (w2_.coin) {
            const std::array<Atom, 2> coin = {Atom{-1.0, 0.5}, Atom{1.0, 0.5}};
            const NormalParams ref(0.0, 1.0);
            const double value = w2_discrete_vs_normal(coin, ref);
            t.add({std::string("coin"), value, ref.mean, ref.sd});
            const double expected = std::sqrt(2.0 - 2.0 * std::sqrt(2.0 / std::numbers::pi));
            Table& s = r.table("self_test", {"expected", "abs_error", "ok"});
            s.add({expected, std::abs(value - expected), std::abs(value - expected) <= 1e-6});
            return;
        }
        if (!w2_.normal.empty()) {
            if (w2_.vs.empty()) throw ValidationError("--normal needs --vs");
            const NormalParams p(w2_.normal[0], w2_.normal[1]);
            const NormalParams q(w2_.vs[0], w2_.vs[1]);
            t.add({std::string("normal"), w2_normal_normal(p, q), q.mean, q.sd});
            return;
        }
        if (!w2_.samples.empty()) {
            std::ifstream in(w2_.samples);
            if (!in) throw ValidationError("cannot open samples file '" + w2_.samples + "'");
            std::vector<double> xs;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                xs.push_back(parse_double(line));
            }
            if (xs.size() < 2) throw ValidationError("samples file needs at least 2 values");
            std::sort(xs.begin(), xs.end());
            double mean = 0.0, var = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size());
            if (w2_.vs.empty() && !(var > 0.0)) throw ValidationError("samples are constant; give --vs");
            const NormalParams ref = ref_or(mean, std::sqrt(var));
            t.add({std::string("empirical"), w2_empirical(xs, ref), ref.mean, ref.sd});
            return;
        }
        const IsingModel m = model_args_.at("w2").load();
        const DirectionVector th = theta_args_.at("w2").resolve(m.size());
        const ProjectionPmf pmf = exact_pmf_of_projection(m, th, kDefaultMergeTolerance, g_.enumeration());
        const double var = pmf.variance();
        if (w2_.vs.empty() && !(var > 0.0)) throw NumericalError("theta'X is degenerate; give --vs");
        const NormalParams ref = ref_or(pmf.mean(), std::sqrt(var));
        t.add({std::string("exact"), w2_discrete_vs_normal(pmf, ref), ref.mean, ref.sd});
    }

    void setup_sample() {
        CLI::App* c = add("sample", "Draw configurations exactly or run a heat-bath chain",
                          [this](Report& r) { sample(r); });
        model_for(c);
        theta_for(c);
        chain_for(c, 100000, 10000);
        c->add_option("--method", sample_.method, "exact or glauber")->check(CLI::IsMember({"exact", "glauber"}));
        c->add_option("--count", sample_.count, "Exact draws");
    }

    void sample(Report& r) {
        const IsingModel m = model_args_.at("sample").load();
        const DirectionVector th = theta_args_.at("sample").resolve(m.size());
        if (sample_.method == "exact") {
            const auto draws = sample_exact(m, sample_.count, g_.seed, g_.enumeration());
            Table& t = r.table("samples", {"draw", "code", "spins", "w"});
            for (std::size_t d = 0; d < draws.size(); ++d) {
                double w = 0.0;
                for (std::size_t i = 0; i < m.size(); ++i) w += th[i] * draws[d][i];
                t.add({idx(d), draws[d].code(), spins_string(draws[d]), w});
            }
            return;
        }
        ChainConfig cc = chain_args_.at("sample").make(g_.seed);
        cc.track_pairs = false;
        const ChainStatistics s = run_chain(m, cc, th.values());
        const auto [w_mean, w_se] = batch_means(s.projection_samples, cc.batches);
        Table& sum = r.table("summary", {"samples", "magnetization_mean", "magnetization_se", "w_mean", "w_se",
                                         "final_state"});
        sum.add({s.samples, s.magnetization_mean, s.magnetization_se, w_mean, w_se, spins_string(s.final_state)});
        Table& sites = r.table("sites", {"site", "mean", "se"});
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            sites.add({idx(i), s.mean(ii), s.mean_se(ii)});
        }
        Table& ac = r.table("autocorrelation", {"lag", "rho"});
        for (const auto& [lag, rho] : s.autocorrelation) ac.add({idx(lag), rho});
    }

    void setup_couple() {
        CLI::App* c = add("couple", "Monotone coupled pair: disagreement drift, up-probability and stationary law",
                          [this](Report& r) { couple(r); });
        model_for(c);
        chain_for(c, 1000000, 10000);
        c->add_option("--site", couple_.site, "Site pinned +1 in one chain and -1 in the other");
        c->add_option("--extra-pins", couple_.extra, "Further oppositely pinned sites")->delimiter(',');
        c->add_option("--min-tail-count", couple_.min_tail_count, "Smallest level count used in the tail fit");
        c->add_option("--trace", couple_.trace, "Write the D_t series to this CSV file");
    }

    void couple(Report& r) {
        const IsingModel m = model_args_.at("couple").load();
        const ChainConfig cc = chain_args_.at("couple").make(g_.seed);
        const CouplingTrace trace = monotone_coupled_pair(m, couple_.site, cc, couple_.extra);
        DisagreementOptions dopt;
        dopt.batches = cc.batches;
        dopt.min_tail_count = couple_.min_tail_count;
        const DisagreementSummary s = summarize_disagreement(trace, dopt);
        const double alpha = dobrushin_report(m).alpha;

        Table& sum = r.table("summary", {"n", "alpha", "ferromagnetic", "steps", "samples", "monotone_violations",
                                         "mean_d", "mean_d_se", "second_moment", "second_moment_se", "burn_in_ok"});
        sum.add({idx(m.size()), alpha, trace.ferromagnetic, cc.steps, s.samples, s.monotone_violations, s.mean,
                 s.mean_se, s.second_moment, s.second_moment_se, s.burn_in_ok});
        Table& fit = r.table("tail_fit", {"start_level", "rate", "scale", "points"});
        if (s.fit) fit.add({idx(s.fit->start_level), s.fit->rate, s.fit->scale, idx(s.fit->points)});
        if (cc.record_every == 1) {
            Table& dr = r.table("drift", {"level", "visits", "drift", "drift_se", "drift_bound", "up_prob", "up_se",
                                          "up_bound"});
            for (const DriftRow& d : drift_statistics(std::span<const CouplingTrace>(&trace, 1), m))
                dr.add({idx(d.level), d.visits, d.drift, d.drift_se, d.drift_bound, d.up_prob, d.up_se, d.up_bound});
        }
        Table& pmf = r.table("pmf", {"d", "prob"});
        for (std::size_t d = 0; d < s.pmf.size(); ++d) pmf.add({idx(d), s.pmf[d]});

        if (couple_.trace.empty()) return;
        std::ostringstream buf;
        write_preamble(buf, "couple", r.config());
        buf << "step,d\n";
        for (std::size_t t = 0; t < trace.d_series.size(); ++t)
            buf << (trace.burn_in + (t + 1) * trace.record_every) << ',' << trace.d_series[t] << '\n';
        std::ofstream file(couple_.trace, std::ios::binary);
        if (!file) throw ValidationError("cannot open trace file '" + couple_.trace + "'");
        file << buf.str();
    }

    void setup_embed() {
        CLI::App* c = add("embed", "Gaussian-interpolation identities: covariance derivative and variance integral",
                          [this](Report& r) { embed(r); });
        model_for(c);
        theta_for(c);
        c->add_option("--t", embed_.times, "Interpolation times for the derivative check")->delimiter(',');
        c->add_option("--triples", embed_.triples, "Index triples i:l:k, comma separated (default: sampled)");
        c->add_option("--checks", embed_.checks, "Sampled triples per time when --triples is not given");
        c->add_option("--delta", embed_.delta, "Central-difference step");
        c->add_option("--nodes", embed_.nodes, "Gauss-Legendre nodes for the variance integral");
        c->add_option("--reps", embed_.reps, "Exact draws of Y_t per node");
        c->add_option("--t-max", embed_.t_max, "Upper end of the variance integral");
        c->add_flag("--skip-variance", embed_.skip_variance, "Only run the derivative check");
    }

    void embed(Report& r) {
        const IsingModel m = model_args_.at("embed").load();
        const std::size_t n = m.size();
        const DirectionVector th = theta_args_.at("embed").resolve(n);
        std::vector<std::array<std::size_t, 3>> triples;
        for (const std::string& item : split(embed_.triples, ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 3) throw ValidationError("triple '" + item + "' is not of the form i:l:k");
            triples.push_back({parse_index(parts[0]), parse_index(parts[1]), parse_index(parts[2])});
        }
        const bool sampled = triples.empty();
        Table& dt = r.table("derivative", {"t", "i", "l", "k", "fd", "formula", "expansion", "rel_err"});
        for (std::size_t a = 0; a < embed_.times.size(); ++a) {
            const double t = embed_.times[a];
            const InterpolantDraw draw = sample_interpolant(m, t, CounterRng::stream(g_.seed, 1, a)(), g_.enumeration());
            if (sampled) {
                triples.clear();
                CounterRng rng = CounterRng::stream(g_.seed, 2, a);
                for (std::size_t c = 0; c < embed_.checks; ++c)
                    triples.push_back({rng.below(n), rng.below(n), rng.below(n)});
            }
            for (const auto& [i, l, k] : triples) {
                const DerivativeCheck d = derivative_identity_check(m, t, draw.y, i, l, k, embed_.delta, g_.enumeration());
                dt.add({t, idx(i), idx(l), idx(k), d.fd, d.formula, d.expansion, d.rel_err});
            }
        }
        if (embed_.skip_variance) return;
        const VarianceIdentityEstimate v =
            variance_identity_estimate(m, th, embed_.nodes, embed_.reps, embed_.t_max, g_.seed, g_.enumeration());
        Table& vt = r.table("variance", {"t_max", "integral", "integral_se", "tail_bound", "sigma2_n", "discrepancy",
                                         "lower", "upper", "within"});
        const double lower = v.sigma2_exact - v.tail_bound - 3.0 * v.integral_se;
        const double upper = v.sigma2_exact + 3.0 * v.integral_se;
        vt.add({embed_.t_max, v.integral_estimate, v.integral_se, v.tail_bound, v.sigma2_exact, v.discrepancy, lower,
                upper, v.integral_estimate >= lower && v.integral_estimate <= upper});
        Table& nt = r.table("nodes", {"t", "weight", "mean", "se"});
        for (std::size_t q = 0; q < v.nodes.size(); ++q) nt.add({v.nodes[q], v.weights[q], v.node_means[q], v.node_se[q]});
    }

    void setup_lattice_decay() {
        CLI::App* c = add("lattice-decay", "Covariance decay with Chebyshev distance on a finite-range box",
                          [this](Report& r) { lattice_decay(r); });
        c->add_option("--sides", lattice_.sides, "Side lengths of the box")->delimiter(',');
        c->add_option("--range", lattice_.range, "Interaction range r");
        c->add_option("--coupling", lattice_.coupling, "Coupling at distance 1..r")->delimiter(',');
        c->add_option("--field", lattice_.field, "Constant field, or one value per site")->delimiter(',');
        c->add_flag("--periodic", lattice_.periodic, "Periodic boundary");
        c->add_option("--origin", lattice_.origin, "Reference site");
        c->add_option("--estimator", lattice_.estimator, "exact or mcmc")->check(CLI::IsMember({"exact", "mcmc"}));
        chain_for(c, 2000000, 20000, false);
    }

    LatticeSpec lattice_spec() const {
        LatticeSpec s;
        s.sides = lattice_.sides;
        s.range = lattice_.range;
        s.coupling = lattice_.coupling;
        s.field = lattice_.field;
        s.boundary = lattice_.periodic ? Boundary::Periodic : Boundary::Free;
        return s;
    }

    void lattice_decay(Report& r) {
        const LatticeSpec spec = lattice_spec();
        const IsingModel m = build_box_model(spec);
        const ChainConfig cc = chain_args_.at("lattice-decay").make(g_.seed);
        const DecayProfile prof =
            correlation_decay_profile(spec, m, lattice_.origin, parse_estimator(lattice_.estimator), cc, g_.enumeration());
        Table& t = r.table("decay", {"distance", "max_abs_cov", "se", "site", "shell_size"});
        for (const DecayRow& d : prof.rows) t.add({idx(d.distance), d.max_abs_cov, d.se, idx(d.site), idx(d.shell_size)});
        Table& f = r.table("fit", {"slope", "intercept", "r2", "slope_se", "points"});
        if (prof.fit) f.add({prof.fit->slope, prof.fit->intercept, prof.fit->r2, prof.fit->slope_se, idx(prof.fit->points)});
    }

    void setup_clt_table() {
        CLI::App* c = add("clt-table", "W2 of theta'X to its normal across a family of growing models",
                          [this](Report& r) { clt_table(r); });
        c->add_option("--family", clt_.family, "product, chain or dobrushin")
            ->check(CLI::IsMember({"product", "chain", "dobrushin"}));
        c->add_option("--sizes", clt_.sizes, "Model sizes")->delimiter(',');
        c->add_option("--beta", clt_.beta, "Chain coupling");
        c->add_option("--field", clt_.field, "Constant field");
        c->add_option("--alpha", clt_.alpha, "Dobrushin row sum");
        c->add_option("--matchings", clt_.matchings, "Random perfect matchings per Dobrushin model");
        c->add_option("--model-seed", clt_.model_seed, "Seed of the random Dobrushin graphs");
        c->add_flag("--periodic", clt_.periodic, "Periodic chain");
        c->add_option("--estimator", clt_.estimator, "exact or mcmc")->check(CLI::IsMember({"exact", "mcmc"}));
        c->add_option("--replicas", clt_.replicas, "Independent chains per size (mcmc)");
        c->add_flag("--bound", clt_.with_bound, "Add the optimized bound column");
        c->add_option("--strategy", clt_.strategy, "Sup strategy for the bound column")
            ->check(CLI::IsMember({"uniform-scan", "grid", "multistart-ascent", "product-closed-form"}));
        chain_for(c, 400000, 20000, false);
    }

    void clt_table(Report& r) {
        std::vector<IsingModel> family;
        for (std::size_t n : clt_.sizes) {
            if (clt_.family == "product") {
                const auto ni = static_cast<Eigen::Index>(n);
                family.push_back(validate_model(Matrix::Zero(ni, ni), Vector::Constant(ni, clt_.field)));
            } else if (clt_.family == "chain") {
                family.push_back(build_box_model(
                    chain_spec(n, clt_.beta, clt_.field, clt_.periodic ? Boundary::Periodic : Boundary::Free)));
            } else {
                family.push_back(dobrushin_ferromagnet(n, clt_.alpha, clt_.matchings, clt_.field, clt_.model_seed));
            }
        }
        CltOptions opt;
        opt.estimator = parse_estimator(clt_.estimator);
        opt.chain = chain_args_.at("clt-table").make(g_.seed);
        opt.seeds.clear();
        for (std::size_t k = 0; k < clt_.replicas; ++k) opt.seeds.push_back(CounterRng::stream(g_.seed, 3, k)());
        opt.with_bound = clt_.with_bound;
        opt.bound_strategy = parse_sup_strategy(clt_.strategy);
        opt.enumeration = g_.enumeration();
        const auto rows = clt_convergence_experiment(family, opt);
        Table& t = r.table("clt", {"n", "mu_n", "sigma2_n", "w2", "w2_se", "bound", "skewness", "excess_kurtosis",
                                   "degenerate", "replicas"});
        for (const CltRow& row : rows)
            t.add({idx(row.n), row.mu_n, row.sigma2_n, opt_cell(row.w2), row.w2_se, opt_cell(row.bound),
                   opt_cell(row.skewness), opt_cell(row.excess_kurtosis), row.degenerate, idx(row.replicas)});
    }

    void setup_make_model() {
        CLI::App* c = app_.add_subcommand("make-model", "Write a model file (JSON)");
        model_for(c);
    }

    CLI::App app_;
    Globals g_;
    std::map<std::string, Handler> handlers_;
    std::map<std::string, ModelArgs> model_args_;
    std::map<std::string, ThetaArgs> theta_args_;
    std::map<std::string, ChainArgs> chain_args_;

    struct {
        double merge_tol = kDefaultMergeTolerance;
        bool no_pmf = false;
    } exact_;
    SpectralOptions spectral_;
    struct {
        std::string strategy = "uniform-scan";
        SupOptions sup;
        std::string grid_file;
        std::vector<double> epsilons;
        std::size_t eps_grid = 0;
        double cp = 0.0;
        bool exact_w2 = false;
    } bound_;
    struct {
        bool coin = false;
        std::vector<double> normal;
        std::vector<double> vs;
        std::string samples;
    } w2_;
    struct {
        std::string method = "exact";
        std::size_t count = 10;
    } sample_;
    struct {
        std::size_t site = 0;
        std::vector<std::size_t> extra;
        std::uint64_t min_tail_count = 10;
        std::string trace;
    } couple_;
    struct {
        std::vector<double> times = {0.3, 0.6};
        std::string triples;
        std::size_t checks = 10;
        double delta = 1e-5;
        std::size_t nodes = 16;
        std::size_t reps = 200;
        double t_max = 0.95;
        bool skip_variance = false;
    } embed_;
    struct {
        std::vector<std::size_t> sides = {16};
        std::size_t range = 1;
        std::vector<double> coupling = {0.2};
        std::vector<double> field = {0.0};
        bool periodic = false;
        std::size_t origin = 0;
        std::string estimator = "exact";
    } lattice_;
    struct {
        std::string family = "chain";
        std::vector<std::size_t> sizes = {8, 12, 16, 20};
        double beta = 0.2;
        double field = 0.0;
        double alpha = 0.5;
        std::size_t matchings = 3;
        std::uint64_t model_seed = 1;
        bool periodic = false;
        std::string estimator = "exact";
        std::size_t replicas = 8;
        bool with_bound = false;
        std::string strategy = "uniform-scan";
    } clt_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Cli cli;
    return cli.run(args, out, err);
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace isingclt::cli
