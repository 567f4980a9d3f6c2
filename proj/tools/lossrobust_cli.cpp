#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "lossrobust/bench.hpp"
#include "lossrobust/calibrate.hpp"
#include "lossrobust/csv.hpp"
#include "lossrobust/dataset.hpp"
#include "lossrobust/lossgeom.hpp"
#include "lossrobust/mlcore.hpp"
#include "lossrobust/robustopt.hpp"
#include "lossrobust/svg.hpp"
#include "lossrobust/synthgen.hpp"

namespace {

using namespace lossrobust;

/// Command-line misuse distinct from runtime failure; exits with code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    for (std::string_view field : split_fields(s)) {
        std::string t = trim(std::string(field));
        if (t.empty()) throw UsageError(flag + ": empty list entry");
        try {
            out.push_back(parse_double(t));
        } catch (const std::exception&) {
            throw UsageError(flag + ": bad numeric value '" + t + "'");
        }
    }
    if (out.empty()) throw UsageError(flag + ": empty list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& flag) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(s, flag)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw UsageError(flag + ": expected nonnegative integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_double_list(s, flag)) {
        if (v != static_cast<double>(static_cast<int>(v)))
            throw UsageError(flag + ": expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<double> parse_alpha_list(const std::string& s) {
    std::vector<double> alphas = parse_double_list(s, "--alpha");
    for (double a : alphas)
        if (!(a > 0.0) || !(a < 1.0)) throw UsageError("--alpha: alpha must lie in (0,1)");
    return alphas;
}

synthgen::Problem problem_from_name(const std::string& s) {
    if (s == "newsvendor") return synthgen::Problem::Newsvendor;
    if (s == "portfolio") return synthgen::Problem::Portfolio;
    if (s == "shortest-path" || s == "shortest_path") return synthgen::Problem::ShortestPath;
    throw UsageError("--problem: expected newsvendor, portfolio or shortest-path, got '" + s + "'");
}

void ensure_parent_dir(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

std::size_t resolve_threads(std::size_t requested) {
    std::size_t cap = 0;
    if (const char* env = std::getenv("LOSSROBUST_THREADS")) {
        try {
            long v = std::stol(env);
            if (v < 1) throw std::invalid_argument("nonpositive");
            cap = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw UsageError("LOSSROBUST_THREADS must be a positive integer");
        }
    }
    std::size_t threads = requested == 0 ? (cap != 0 ? cap : 1) : requested;
    if (cap != 0) threads = std::min(threads, cap);
    return std::max<std::size_t>(threads, 1);
}

/**
 * Expands `--config file` into ordinary tokens: each `key = value` line of
 * the file becomes `--key value` appended after the explicit arguments, so
 * flags given on the command line always win.  `key = true` lines inject
 * bare flags; `key = false` lines are dropped.
 */
std::vector<std::string> inject_config(int argc, char** argv) {
    std::vector<std::string> tokens;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        std::string t = argv[i];
        if (t == "--config") {
            if (i + 1 >= argc) throw UsageError("--config requires a file argument");
            config_path = argv[++i];
        } else if (t.rfind("--config=", 0) == 0) {
            config_path = t.substr(9);
        } else {
            tokens.push_back(std::move(t));
        }
    }
    if (config_path.empty()) return tokens;

    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config file " + config_path);
    auto have_flag = [&tokens](const std::string& flag) {
        for (const std::string& t : tokens)
            if (t == flag || t.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::string line;
    while (std::getline(in, line)) {
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line without '=': " + s);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw UsageError("config line with empty key: " + s);
        std::string flag = "--" + key;
        if (have_flag(flag)) continue;
        if (value == "true") {
            tokens.push_back(flag);
        } else if (value == "false") {
            continue;
        } else {
            tokens.push_back(flag);
            tokens.push_back(value);
        }
    }
    return tokens;
}

// ---------------------------------------------------------------- generate
struct GenerateArgs {
    std::string problem = "portfolio";
    uint64_t seed = 0;
    std::size_t n = 1000, n_val = 0, n_test = 0, p = 10, assets = 5;
    double noise = 0.0;
    int grid_side = 5, deg = 1;
    std::string output;
};

int run_generate(const GenerateArgs& a) {
    synthgen::GenConfig cfg;
    cfg.problem = problem_from_name(a.problem);
    cfg.seed = a.seed;
    cfg.n_samples = a.n;
    cfg.n_val = a.n_val;
    cfg.n_test = a.n_test;
    cfg.p = a.p;
    cfg.noise = a.noise;
    cfg.n_assets = a.assets;
    cfg.grid_side = a.grid_side;
    cfg.deg = a.deg;
    LabeledDataset ds = synthgen::generate(cfg);
    ensure_parent_dir(a.output);
    save_dataset_csv(ds, a.output);
    std::cout << "wrote " << ds.n_rows() << " rows (" << ds.count(Split::Train) << " train, "
              << ds.count(Split::Val) << " val, " << ds.count(Split::Test) << " test) to "
              << a.output << "\n";
    return 0;
}

// ------------------------------------------------------------------- train
struct TrainArgs {
    std::string input, head = "regression", output;
    uint64_t seed = 0;
    std::size_t hidden = 5, epochs = 1000, batch = 64, patience = 10, warmup = 25;
    double lr = 1e-3, val_fraction = 0.3;
};

int run_train(const TrainArgs& a) {
    LabeledDataset ds = load_dataset_csv(a.input);
    mlcore::TrainConfig cfg;
    cfg.seed = a.seed;
    cfg.hidden = a.hidden;
    cfg.max_epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.patience = a.patience;
    cfg.variance_warmup_epochs = a.warmup;
    cfg.learning_rate = a.lr;
    cfg.val_fraction = a.val_fraction;
    mlcore::Head head = mlcore::head_from_name(a.head);
    mlcore::PredictorModel model = mlcore::train(ds, head, cfg);
    ensure_parent_dir(a.output);
    mlcore::save_model(model, a.output);
    std::cout << "trained " << mlcore::head_name(head) << " model (hidden=" << model.hidden()
              << ") on " << ds.count(Split::Train) << " rows; saved to " << a.output << "\n";
    return 0;
}

// --------------------------------------------------------------- calibrate
struct CalibrateArgs {
    std::string input, model, method = "order-stat", alpha = "0.1", output;
    std::size_t classes = 0;
    bool exact_tail = false;
};

int run_calibrate(const CalibrateArgs& a) {
    std::vector<double> alphas = parse_alpha_list(a.alpha);
    LabeledDataset ds = load_dataset_csv(a.input);
    std::vector<calibrate::CalibrationResult> results;

    if (a.method == "phi-div") {
        std::size_t classes = a.classes != 0 ? a.classes : ds.n_targets();
        for (double al : alphas)
            results.push_back(calibrate::radius_phi_divergence(ds.count(Split::Train), classes, al));
    } else {
        if (a.model.empty())
            throw UsageError("--model is required unless --method phi-div");
        mlcore::PredictorModel model = mlcore::load_model(a.model);
        Matrix vx = ds.x_rows(Split::Val);
        Matrix vy = ds.y_rows(Split::Val);
        if (model.head == mlcore::Head::SoftmaxClassifier) {
            if (a.method != "order-stat")
                throw UsageError("--method " + a.method + " requires a regression model");
            Vec ce(vx.rows);
            for (std::size_t i = 0; i < vx.rows; ++i) {
                mlcore::Prediction pred = model.predict(vx.row(i));
                std::size_t lbl = 0;
                for (std::size_t j = 1; j < vy.cols; ++j)
                    if (vy(i, j) > vy(i, lbl)) lbl = j;
                ce[i] = -std::log(std::max(pred.probs[lbl], 1e-300));
            }
            calibrate::ValidationLosses losses{std::move(ce)};
            for (double al : alphas)
                results.push_back(calibrate::radius_order_statistic(losses, al));
        } else {
            bool standardized = model.head == mlcore::Head::RegressionWithVariance;
            Matrix sq(vx.rows, vy.cols);
            for (std::size_t i = 0; i < vx.rows; ++i) {
                mlcore::Prediction pred = model.predict(vx.row(i));
                for (std::size_t j = 0; j < vy.cols; ++j) {
                    double d = vy(i, j) - pred.mean[j];
                    if (standardized) d /= std::sqrt(pred.variance[j]);
                    sq(i, j) = d * d;
                }
            }
            if (a.method == "order-stat") {
                Vec norms(sq.rows);
                for (std::size_t i = 0; i < sq.rows; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < sq.cols; ++j) s += sq(i, j);
                    norms[i] = std::sqrt(s);
                }
                calibrate::ValidationLosses losses{std::move(norms)};
                for (double al : alphas)
                    results.push_back(calibrate::radius_order_statistic(losses, al));
            } else if (a.method == "tailored") {
                calibrate::TailoredInputs in{std::move(sq)};
                for (double al : alphas)
                    results.push_back(calibrate::radius_tailored(in, al, !a.exact_tail));
            } else if (a.method == "sub-gaussian") {
                for (double al : alphas)
                    results.push_back(calibrate::radius_sub_gaussian(sq, al));
            } else {
                throw UsageError(
                    "--method: expected order-stat, tailored, sub-gaussian or phi-div, got '" +
                    a.method + "'");
            }
        }
    }

    ensure_parent_dir(a.output);
    std::ofstream out(a.output);
    if (!out) throw std::runtime_error("cannot open " + a.output);
    out << calibrate::CalibrationResult::csv_header() << "\n";
    for (const auto& r : results) out << r.to_csv_row() << "\n";
    for (const auto& r : results)
        std::cout << "alpha=" << format_double(r.alpha) << " radius=" << format_double(r.radius)
                  << "\n";
    return 0;
}

// ------------------------------------------------------------------- solve
struct SolveArgs {
    std::string problem = "portfolio", set_file, loss, center, scale, method_label = "manual";
    double radius = -1.0, norm_radius = -1.0, alpha = 0.1;
    std::string demand = "1,10";
    double order_cost = 1.0, backlog_cost = 6.0, holding_cost = 2.0;
    int grid_side = 5;
    std::string output;
};

int run_solve(const SolveArgs& a) {
    lossgeom::UncertaintySetSpec set;
    if (!a.set_file.empty()) {
        set = lossgeom::load_set_spec(a.set_file);
    } else {
        if (a.loss.empty() || a.center.empty())
            throw UsageError("solve needs either --set or --loss/--center/--radius");
        set.loss = lossgeom::loss_kind_from_name(a.loss);
        set.center = parse_double_list(a.center, "--center");
        if (!a.scale.empty()) set.scale = parse_double_list(a.scale, "--scale");
        if (a.radius >= 0.0 && a.norm_radius >= 0.0)
            throw UsageError("--radius and --norm-radius are mutually exclusive");
        if (a.radius >= 0.0) {
            set.radius = a.radius;
        } else if (a.norm_radius >= 0.0) {
            set.radius = a.norm_radius * a.norm_radius;
        } else {
            throw UsageError("solve needs --radius (loss threshold) or --norm-radius");
        }
    }
    set.validate();

    robustopt::RobustProblem prob;
    prob.set = set;
    synthgen::Problem kind = problem_from_name(a.problem);
    if (kind == synthgen::Problem::Newsvendor) {
        prob.kind = robustopt::RobustProblem::Kind::Newsvendor;
        prob.newsvendor.order_cost = a.order_cost;
        prob.newsvendor.backlog_cost = a.backlog_cost;
        prob.newsvendor.holding_cost = a.holding_cost;
        prob.newsvendor.demands = parse_double_list(a.demand, "--demand");
    } else if (kind == synthgen::Problem::Portfolio) {
        prob.kind = robustopt::RobustProblem::Kind::Portfolio;
    } else {
        prob.kind = robustopt::RobustProblem::Kind::ShortestPath;
        prob.grid_side = a.grid_side;
    }
    robustopt::RobustSolution sol = robustopt::solve(prob);

    if (!a.output.empty()) {
        ensure_parent_dir(a.output);
        std::ofstream out(a.output);
        if (!out) throw std::runtime_error("cannot open " + a.output);
        out << robustopt::solution_csv_header(sol.decision.size()) << "\n"
            << robustopt::solution_csv_row(a.problem, a.alpha, a.method_label, set.radius, sol)
            << "\n";
    }
    std::cout << "robust value " << format_double(sol.robust_value) << " after " << sol.iterations
              << " iterations\n";
    return 0;
}

// -------------------------------------------------------------- experiment
struct ExperimentArgs {
    std::string problem = "portfolio";
    std::string n, noise, deg, alpha = "0.1", methods;
    std::size_t seeds = 10, knn_k = 10, n_val = 0, n_test = 0, p = 10, assets = 5, threads = 0;
    int grid_side = 5;
    uint64_t master_seed = 0x5eedba5eull;
    bool serial = false;
    std::string output_dir = ".";
};

int run_experiment_cmd(const ExperimentArgs& a) {
    bench::ExperimentConfig cfg;
    cfg.problem = problem_from_name(a.problem);
    bool newsv = cfg.problem == synthgen::Problem::Newsvendor;
    bool sp = cfg.problem == synthgen::Problem::ShortestPath;

    cfg.n_grid = parse_size_list(a.n.empty() ? (newsv ? "2000" : "1000") : a.n, "--n");
    cfg.noise_grid =
        parse_double_list(a.noise.empty() ? (sp ? "0.1" : "0") : a.noise, "--noise");
    if (!a.deg.empty()) cfg.deg_grid = parse_int_list(a.deg, "--deg");
    cfg.alpha_grid = parse_alpha_list(a.alpha);
    std::string methods = a.methods.empty() ? (newsv ? "ml_ce_kl,phi_div" : "classical,mse,msev")
                                            : a.methods;
    for (std::string_view field : split_fields(methods)) {
        try {
            cfg.methods.push_back(bench::MethodSpec::from_name(trim(std::string(field)), a.knn_k));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--methods: ") + e.what());
        }
    }
    cfg.seeds = a.seeds;
    cfg.master_seed = a.master_seed;
    cfg.n_val = a.n_val;
    cfg.n_test = a.n_test;
    cfg.p = a.p;
    cfg.n_assets = a.assets;
    cfg.grid_side = a.grid_side;
    cfg.threads = resolve_threads(a.threads);
    cfg.use_parallel = !a.serial;

    bench::ExperimentReport rep = bench::run_experiment(cfg);
    std::filesystem::create_directories(a.output_dir);
    std::string report_path = a.output_dir + "/report.csv";
    bench::write_report_csv(rep, report_path);
    bench::write_figure_csvs(rep, a.output_dir);
    std::cout << "wrote " << rep.rows.size() << " report rows (" << cfg.seeds << " seeds each) to "
              << report_path << "\n";
    return 0;
}

// -------------------------------------------------------------------- plot
struct PlotArgs {
    std::string input, output_dir = ".", x_axis = "alpha", y_label;
};

struct FigRow {
    std::string problem;
    std::size_t n = 0;
    double noise = 0.0;
    bool has_deg = false;
    int deg = 0;
    std::string method;
    double alpha = 0.0, violation = 0.0, value = 0.0;
};

int run_plot(const PlotArgs& a) {
    if (a.x_axis != "alpha" && a.x_axis != "violation")
        throw UsageError("--x-axis: expected alpha or violation");
    std::ifstream in(a.input);
    if (!in) throw std::runtime_error("cannot open " + a.input);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty figure csv: " + a.input);
    if (trim(line) != "problem,N,noise,deg,method,alpha,violation,value")
        throw std::runtime_error("unexpected figure csv header in " + a.input);
    std::vector<FigRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 8) throw std::runtime_error("bad figure csv row: " + line);
        FigRow r;
        r.problem = std::string(f[0]);
        r.n = static_cast<std::size_t>(parse_double(f[1]));
        r.noise = parse_double(f[2]);
        r.has_deg = !f[3].empty();
        if (r.has_deg) r.deg = static_cast<int>(parse_double(f[3]));
        r.method = std::string(f[4]);
        r.alpha = parse_double(f[5]);
        r.violation = parse_double(f[6]);
        r.value = parse_double(f[7]);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("empty figure csv: " + a.input);

    // metric token from fig_<problem>_<metric>.csv, else "value"
    std::string stem = std::filesystem::path(a.input).stem().string();
    std::string metric = "value";
    std::size_t us = stem.rfind('_');
    if (stem.rfind("fig_", 0) == 0 && us != std::string::npos && us > 4) metric = stem.substr(us + 1);
    std::string y_label = a.y_label.empty() ? metric : a.y_label;
    std::string x_label = a.x_axis == "alpha" ? "target alpha" : "realized violation rate";

    std::vector<std::size_t> ns;
    for (const FigRow& r : rows)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());

    std::filesystem::create_directories(a.output_dir);
    for (std::size_t n : ns) {
        std::vector<std::pair<double, int>> panel_keys;
        for (const FigRow& r : rows)
            if (r.n == n) {
                std::pair<double, int> key{r.noise, r.deg};
                if (std::find(panel_keys.begin(), panel_keys.end(), key) == panel_keys.end())
                    panel_keys.push_back(key);
            }
        std::sort(panel_keys.begin(), panel_keys.end());

        std::vector<svg::Panel> panels;
        for (auto [noise, deg] : panel_keys) {
            svg::Panel panel;
            std::ostringstream title;
            title << "noise=" << format_double(noise);
            bool has_deg = false;
            std::vector<std::string> methods;
            for (const FigRow& r : rows) {
                if (r.n != n || r.noise != noise || (r.has_deg && r.deg != deg)) continue;
                if (r.has_deg) has_deg = true;
                if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
                    methods.push_back(r.method);
            }
            if (has_deg) title << " deg=" << deg;
            panel.title = title.str();
            for (const std::string& m : methods) {
                svg::Series series;
                series.label = m;
                for (const FigRow& r : rows) {
                    if (r.n != n || r.noise != noise || (r.has_deg && r.deg != deg) ||
                        r.method != m)
                        continue;
                    double x = a.x_axis == "alpha" ? r.alpha : r.violation;
                    series.points.emplace_back(x, r.value);
                }
                std::stable_sort(series.points.begin(), series.points.end(),
                                 [](const auto& l, const auto& rr) { return l.first < rr.first; });
                panel.series.push_back(std::move(series));
            }
            panels.push_back(std::move(panel));
        }
        std::string chart_title = rows[0].problem + " " + metric + " (N=" + std::to_string(n) + ")";
        std::string out_path = a.output_dir + "/plot_" + rows[0].problem + "_" + metric + "_N" +
                               std::to_string(n) + ".svg";
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << svg::render(panels, chart_title, x_label, y_label);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> tokens;
    try {
        tokens = inject_config(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"uncertainty sets from prediction losses: data, training, calibration, "
                 "robust solves, experiments and plots"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* cgen = app.add_subcommand("generate", "Draw a synthetic dataset and write it as CSV");
    cgen->add_option("--problem", gen.problem, "newsvendor, portfolio or shortest-path");
    cgen->add_option("--seed", gen.seed, "RNG seed");
    cgen->add_option("--n", gen.n, "training rows");
    cgen->add_option("--n-val", gen.n_val, "calibration rows (0: match --n)");
    cgen->add_option("--n-test", gen.n_test, "test rows (0: problem default)");
    cgen->add_option("--p", gen.p, "covariate dimension");
    cgen->add_option("--noise", gen.noise, "noise level");
    cgen->add_option("--assets", gen.assets, "portfolio assets");
    cgen->add_option("--grid-side", gen.grid_side, "shortest-path grid side");
    cgen->add_option("--deg", gen.deg, "shortest-path signal exponent");
    cgen->add_option("--output", gen.output, "output dataset CSV")->required();

    TrainArgs tr;
    CLI::App* ctr = app.add_subcommand("train", "Train a predictor on a dataset CSV");
    ctr->add_option("--input", tr.input, "dataset CSV")->required();
    ctr->add_option("--head", tr.head, "regression, regression_with_variance or softmax_classifier");
    ctr->add_option("--output", tr.output, "model file")->required();
    ctr->add_option("--seed", tr.seed, "training seed");
    ctr->add_option("--hidden", tr.hidden, "hidden units");
    ctr->add_option("--epochs", tr.epochs, "max epochs");
    ctr->add_option("--batch", tr.batch, "batch size");
    ctr->add_option("--patience", tr.patience, "early-stopping patience (epochs)");
    ctr->add_option("--warmup", tr.warmup, "variance-head warmup epochs");
    ctr->add_option("--lr", tr.lr, "learning rate");
    ctr->add_option("--val-fraction", tr.val_fraction, "train carve-out for early stopping");

    CalibrateArgs cal;
    CLI::App* ccal = app.add_subcommand("calibrate", "Turn validation losses into a radius");
    ccal->add_option("--input", cal.input, "dataset CSV")->required();
    ccal->add_option("--model", cal.model, "model file (not needed for phi-div)");
    ccal->add_option("--method", cal.method, "order-stat, tailored, sub-gaussian or phi-div");
    ccal->add_option("--alpha", cal.alpha, "target violation probabilities, comma separated");
    ccal->add_option("--classes", cal.classes, "scenario count for phi-div (0: target columns)");
    ccal->add_flag("--exact-tail", cal.exact_tail, "use the finite-sample tailored form");
    ccal->add_option("--output", cal.output, "calibration CSV")->required();

    SolveArgs sol;
    CLI::App* csol = app.add_subcommand("solve", "Solve one robust problem for a given set");
    csol->add_option("--problem", sol.problem, "newsvendor, portfolio or shortest-path");
    csol->add_option("--set", sol.set_file, "uncertainty-set spec file");
    csol->add_option("--loss", sol.loss, "loss kind for an inline set");
    csol->add_option("--center", sol.center, "inline set center, comma separated");
    csol->add_option("--scale", sol.scale, "inline per-component scale");
    csol->add_option("--radius", sol.radius, "loss threshold rho");
    csol->add_option("--norm-radius", sol.norm_radius, "norm radius (squared into the threshold)");
    csol->add_option("--alpha", sol.alpha, "alpha recorded in the output row");
    csol->add_option("--method-label", sol.method_label, "method recorded in the output row");
    csol->add_option("--demand", sol.demand, "newsvendor scenario demands");
    csol->add_option("--order-cost", sol.order_cost, "newsvendor order cost");
    csol->add_option("--backlog-cost", sol.backlog_cost, "newsvendor backlog cost");
    csol->add_option("--holding-cost", sol.holding_cost, "newsvendor holding cost");
    csol->add_option("--grid-side", sol.grid_side, "shortest-path grid side");
    csol->add_option("--output", sol.output, "solution CSV");

    ExperimentArgs exp;
    CLI::App* cexp = app.add_subcommand("experiment", "Run a benchmark grid and emit report CSVs");
    cexp->add_option("--problem", exp.problem, "newsvendor, portfolio or shortest-path");
    cexp->add_option("--n", exp.n, "training sizes, comma separated");
    cexp->add_option("--noise", exp.noise, "noise levels, comma separated");
    cexp->add_option("--deg", exp.deg, "shortest-path exponents, comma separated");
    cexp->add_option("--alpha", exp.alpha, "target violation probabilities");
    cexp->add_option("--methods", exp.methods, "methods, comma separated");
    cexp->add_option("--seeds", exp.seeds, "replications per cell");
    cexp->add_option("--knn-k", exp.knn_k, "neighborhood size for knn");
    cexp->add_option("--n-val", exp.n_val, "calibration rows (0: match train)");
    cexp->add_option("--n-test", exp.n_test, "test rows (0: problem default)");
    cexp->add_option("--p", exp.p, "covariate dimension");
    cexp->add_option("--assets", exp.assets, "portfolio assets");
    cexp->add_option("--grid-side", exp.grid_side, "shortest-path grid side");
    cexp->add_option("--master-seed", exp.master_seed, "base seed for all cells");
    cexp->add_option("--threads", exp.threads, "worker cap (0: LOSSROBUST_THREADS or 1)");
    cexp->add_flag("--serial", exp.serial, "force the serial reference loop");
    cexp->add_option("--output-dir", exp.output_dir, "directory for report.csv and figure CSVs");

    PlotArgs plot;
    CLI::App* cplot = app.add_subcommand("plot", "Render a figure CSV as SVG charts");
    cplot->add_option("--input", plot.input, "figure CSV from experiment")->required();
    cplot->add_option("--output-dir", plot.output_dir, "directory for SVG files");
    cplot->add_option("--x-axis", plot.x_axis, "alpha or violation");
    cplot->add_option("--y-label", plot.y_label, "y-axis label override");

    std::vector<char*> cargv;
    static std::string prog = "lossrobust";
    cargv.push_back(prog.data());
    for (std::string& t : tokens) cargv.push_back(t.data());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (cgen->parsed()) return run_generate(gen);
        if (ctr->parsed()) return run_train(tr);
        if (ccal->parsed()) return run_calibrate(cal);
        if (csol->parsed()) return run_solve(sol);
        if (cexp->parsed()) return run_experiment_cmd(exp);
        if (cplot->parsed()) return run_plot(plot);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
