// Command line front end: builds bases, refinement relations, and transforms
// from a JSON experiment configuration and moves coefficient data in and out.
// Exit codes: 0 success, 1 a numerical check failed, 2 invalid input.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "bbw/bbw.hpp"

using namespace bbw;

namespace {

struct Options {
    std::string config;
    std::string data;
    std::string out;
    long level = -1;
    long samples = -1;
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

std::size_t grid_index(const ExperimentConfig& cfg, long level) {
    if (level < 0) return cfg.hierarchy.depth() - 1;
    if (static_cast<std::size_t>(level) >= cfg.hierarchy.depth())
        throw DomainError("level " + std::to_string(level) + " out of range, hierarchy has " +
                          std::to_string(cfg.hierarchy.depth()) + " grids");
    return static_cast<std::size_t>(level);
}

std::size_t band_index(const ExperimentConfig& cfg, long level) {
    const std::size_t refinements = cfg.hierarchy.refinements();
    if (refinements == 0) throw DomainError("config has no refinement levels");
    if (level < 0) return refinements - 1;
    if (static_cast<std::size_t>(level) >= refinements)
        throw DomainError("level " + std::to_string(level) + " out of range, hierarchy has " +
                          std::to_string(refinements) + " refinements");
    return static_cast<std::size_t>(level);
}

std::size_t sample_count(const ExperimentConfig& cfg, long samples) {
    if (samples < 0) return cfg.sample_count;
    if (samples < 2) throw DomainError("--samples must be at least 2");
    return static_cast<std::size_t>(samples);
}

double tolerance_scale() {
    const char* env = std::getenv("BBW_TOLERANCE_SCALE");
    if (!env || !*env) return 1.0;
    char* end = nullptr;
    const double s = std::strtod(env, &end);
    if (end == env || *end != '\0' || !std::isfinite(s) || s <= 0.0)
        throw DomainError("BBW_TOLERANCE_SCALE must be a positive number");
    return s;
}

Vector read_data_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_coefficients(in);
}

void run_basis(const ExperimentConfig& cfg, const Options& opt) {
    const BrokenBasis basis(cfg.family, cfg.hierarchy.grid(grid_index(cfg, opt.level)));
    if (ends_with(opt.out, ".json")) {
        emit(opt.out, basis_to_json(basis).dump(2) + "\n");
        return;
    }
    const std::size_t n = sample_count(cfg, opt.samples);
    std::string text = "x";
    for (std::size_t k = 0; k < basis.count(); ++k) text += ",phi" + std::to_string(k);
    text += "\n";
    for (std::size_t s = 0; s < n; ++s) {
        const double x = static_cast<double>(s) / static_cast<double>(n - 1);
        const Vector row = basis.evaluate_all(x, 0);
        text += fmt17(x);
        for (double v : row) text += "," + fmt17(v);
        text += "\n";
    }
    emit(opt.out, text);
}

void run_wavelets(const ExperimentConfig& cfg, const Options& opt) {
    const TransformPlan plan(cfg.family, cfg.hierarchy, cfg.vanishing_moments);
    const std::size_t j = band_index(cfg, opt.level);
    const std::size_t count = plan.scheme(j).detail_count;
    const std::size_t n = sample_count(cfg, opt.samples);
    std::string text = "x";
    for (std::size_t m = 0; m < count; ++m) text += ",psi" + std::to_string(m);
    text += "\n";
    for (std::size_t s = 0; s < n; ++s) {
        const double x = static_cast<double>(s) / static_cast<double>(n - 1);
        text += fmt17(x);
        for (std::size_t m = 0; m < count; ++m) text += "," + fmt17(plan.wavelet_value(j, m, x));
        text += "\n";
    }
    emit(opt.out, text);
}

void run_refine(const ExperimentConfig& cfg, const Options& opt) {
    const TransformPlan plan(cfg.family, cfg.hierarchy, cfg.vanishing_moments);
    const std::size_t j = band_index(cfg, opt.level);
    const json doc{{"level", j},
                   {"refinement", band_to_json(plan.refinement(j))},
                   {"scheme", scheme_to_json(plan.scheme(j))}};
    emit(opt.out, doc.dump(2) + "\n");
}

void run_project(const ExperimentConfig& cfg, const Options& opt) {
    if (!cfg.project_target) throw DomainError("config has no \"project_target\"");
    const BrokenBasis basis(cfg.family, cfg.hierarchy.grid(grid_index(cfg, opt.level)));
    const SmoothFunction target = *cfg.project_target;
    const auto pr = basis.project([&target](double x) { return target.eval(x, 0); });
    emit(opt.out, write_coefficients(pr.coeffs));
    std::fprintf(opt.out.empty() ? stderr : stdout, "l2_error %.17g\n", pr.l2_error);
}

void run_forward(const ExperimentConfig& cfg, const Options& opt) {
    const TransformPlan plan(cfg.family, cfg.hierarchy, cfg.vanishing_moments);
    const CoefficientPyramid pyr = plan.forward(read_data_vector(opt.data));
    if (ends_with(opt.out, ".json"))
        emit(opt.out, pyramid_to_json(pyr).dump(2) + "\n");
    else
        emit(opt.out, pyramid_to_csv(pyr));
}

void run_inverse(const ExperimentConfig& cfg, const Options& opt) {
    CoefficientPyramid pyr;
    if (ends_with(opt.data, ".json")) {
        pyr = pyramid_from_json(load_json_file(opt.data));
    } else {
        std::ifstream in(opt.data);
        if (!in) throw IoError("cannot open " + opt.data);
        pyr = pyramid_from_csv(in);
    }
    const TransformPlan plan(cfg.family, cfg.hierarchy, cfg.vanishing_moments);
    emit(opt.out, write_coefficients(plan.inverse(pyr)));
}

int run_check(const ExperimentConfig& cfg, const Options& opt) {
    const TransformPlan plan(cfg.family, cfg.hierarchy, cfg.vanishing_moments);
    const std::size_t samples = sample_count(cfg, opt.samples);
    const double scale = tolerance_scale();
    int failed = 0;

    const auto line = [&](const char* name, double measured, double tol) {
        const bool ok = measured < tol * scale;
        if (!ok) ++failed;
        std::printf("%-16s max %-12.3g tol %-12.3g %s\n", name, measured, tol * scale,
                    ok ? "PASS" : "FAIL");
    };

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double roundtrip = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Vector x(plan.basis(plan.levels()).count());
        for (double& v : x) v = u(rng);
        const Vector back = plan.inverse(plan.forward(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            roundtrip = std::max(roundtrip, std::abs(back[i] - x[i]));
    }
    line("round-trip", roundtrip, 1e-9);

    double two_scale = 0.0, row_sums = 0.0, jumps = 0.0, moments = 0.0;
    for (std::size_t j = 0; j < plan.levels(); ++j) {
        const BandMatrix& h = plan.refinement(j);
        const BrokenBasis& fine = plan.basis(j + 1);
        two_scale = std::max(two_scale, two_scale_residual(plan.basis(j), fine, h, samples));
        row_sums = std::max(row_sums, max_row_sum_deviation(h));

        const Matrix eq = jump_matrix(fine).equilibrated();
        for (std::size_t r = 0; r < eq.rows(); ++r)
            for (std::size_t k = 0; k < h.cols(); ++k) {
                double s = 0.0;
                for (std::size_t l = 0; l < h.rows(); ++l) s += eq(r, l) * h(l, k);
                jumps = std::max(jumps, std::abs(s));
            }

        const Matrix& g = plan.highpass(j);
        const Matrix fm = fine.moments(static_cast<int>(plan.vanishing_moments()) - 1);
        const std::size_t bl = plan.split(j).bl;
        for (std::size_t q = 0; q < plan.vanishing_moments(); ++q)
            for (std::size_t m = 0; m < g.cols(); ++m) {
                double s = 0.0;
                for (std::size_t l = 0; l < g.rows(); ++l) s += fm(q, bl + l) * g(l, m);
                moments = std::max(moments, std::abs(s));
            }
    }
    line("two-scale", two_scale, 1e-8);
    line("row-sums", row_sums, 1e-10);
    line("jumps", jumps, 1e-8);
    line("moments", moments, 1e-9);

    if (failed) {
        std::printf("%d check(s) failed\n", failed);
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Broken-basis wavelet transforms on nonequispaced knots"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* sub, bool level, bool data, bool samples) {
        sub->add_option("--config", opt.config, "experiment configuration (JSON)")->required();
        sub->add_option("--out", opt.out, "output file, stdout when omitted");
        if (level) sub->add_option("--level", opt.level, "level index, finest when omitted");
        if (data) sub->add_option("--data", opt.data, "input coefficient file")->required();
        if (samples) sub->add_option("--samples", opt.samples, "curve sample count");
    };

    CLI::App* basis = app.add_subcommand("basis", "dump one level's basis");
    add_common(basis, true, false, true);
    CLI::App* wavelets = app.add_subcommand("wavelets", "dump one band's wavelets");
    add_common(wavelets, true, false, true);
    CLI::App* refine = app.add_subcommand("refine", "dump a refinement relation and its scheme");
    add_common(refine, true, false, false);
    CLI::App* project = app.add_subcommand("project", "project the configured target");
    add_common(project, true, false, false);
    CLI::App* forward = app.add_subcommand("forward", "analyze fine coefficients");
    add_common(forward, false, true, false);
    CLI::App* inverse = app.add_subcommand("inverse", "synthesize from a pyramid");
    add_common(inverse, false, true, false);
    CLI::App* check = app.add_subcommand("check", "run the verification battery");
    add_common(check, false, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const ExperimentConfig cfg = parse_config(load_json_file(opt.config));
        if (basis->parsed()) run_basis(cfg, opt);
        if (wavelets->parsed()) run_wavelets(cfg, opt);
        if (refine->parsed()) run_refine(cfg, opt);
        if (project->parsed()) run_project(cfg, opt);
        if (forward->parsed()) run_forward(cfg, opt);
        if (inverse->parsed()) run_inverse(cfg, opt);
        if (check->parsed()) return run_check(cfg, opt);
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SizeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    }
    return 0;
}
