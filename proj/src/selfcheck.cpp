#include "inkdk/selfcheck.hpp"

#include "inkdk/dataio.hpp"
#include "inkdk/ensemble.hpp"
#include "inkdk/features.hpp"
#include "inkdk/net.hpp"
#include "inkdk/nln.hpp"
#include "inkdk/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

namespace inkdk {

namespace {

double sig_distance(const Sig2& a, const Sig2& b) {
    double d = std::abs(a.level0 - b.level0);
    for (int i = 0; i < 2; ++i) {
        d = std::max(d, std::abs(a.level1[i] - b.level1[i]));
        for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(a.level2[i][j] - b.level2[i][j]));
    }
    return d;
}

std::vector<Point> random_polyline(Rng& rng, int points) {
    std::vector<Point> p;
    for (int i = 0; i < points; ++i) p.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    return p;
}

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Each check returns an empty string on success, otherwise the failure.
std::string check_segment_signature() {
    Rng rng(derive_seed(7, "selfcheck-segment"));
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Point p{uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)};
        const Point q{uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)};
        const Sig2 s = seg_signature(p, q);
        const double d[2] = {q.x - p.x, q.y - p.y};
        for (int i = 0; i < 2; ++i) {
            worst = std::max(worst, std::abs(s.level1[i] - d[i]));
            for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(s.level2[i][j] - d[i] * d[j] / 2.0));
        }
    }
    if (worst > 1e-12) return fmt("segment level-2 deviates by %.3g", worst);
    const std::vector<Point> l{{0, 0}, {1, 0}, {1, 1}};
    Sig2 expected;
    expected.level1 = {1.0, 1.0};
    expected.level2 = {Vec2{0.5, 1.0}, Vec2{0.0, 0.5}};
    const double dl = sig_distance(path_signature(l), expected);
    if (dl > 1e-12) return fmt("L-path signature off by %.3g", dl);
    return {};
}

std::string check_signature_algebra() {
    Rng rng(derive_seed(7, "selfcheck-algebra"));
    double chen = 0.0;
    double shuffle = 0.0;
    double midpoint = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto a = random_polyline(rng, 2 + static_cast<int>(k % 5));
        auto b = random_polyline(rng, 2 + static_cast<int>(k % 3));
        b.front() = a.back();
        std::vector<Point> ab = a;
        ab.insert(ab.end(), b.begin() + 1, b.end());
        const Sig2 whole = path_signature(ab);
        chen = std::max(chen, sig_distance(whole, chen_concat(path_signature(a), path_signature(b))));
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                shuffle = std::max(shuffle, std::abs(whole.level2[i][j] + whole.level2[j][i] -
                                                     whole.level1[i] * whole.level1[j]));
            }
        }
        std::vector<Point> split = ab;
        const Point m{(ab[0].x + ab[1].x) / 2.0, (ab[0].y + ab[1].y) / 2.0};
        split.insert(split.begin() + 1, m);
        midpoint = std::max(midpoint, sig_distance(whole, path_signature(split)));
    }
    if (chen > 1e-10) return fmt("Chen identity off by %.3g", chen);
    if (shuffle > 1e-10) return fmt("shuffle identity off by %.3g", shuffle);
    if (midpoint > 1e-10) return fmt("collinear midpoint changes the signature by %.3g", midpoint);
    return {};
}

std::string check_dir8() {
    double worst = 0.0;
    for (int deg = 0; deg < 360; ++deg) {
        const double t = deg * std::numbers::pi / 180.0;
        const Vec2 u{std::cos(t), std::sin(t)};
        const auto w = decompose8(u);
        Vec2 r{0.0, 0.0};
        int nonzero = 0;
        int first = -1;
        int last = -1;
        for (int k = 0; k < 8; ++k) {
            if (w[static_cast<std::size_t>(k)] < 0.0) return "negative weight at " + std::to_string(deg) + " degrees";
            if (w[static_cast<std::size_t>(k)] == 0.0) continue;
            ++nonzero;
            if (first < 0) first = k;
            last = k;
            const Vec2 a = direction_axis(k);
            r[0] += w[static_cast<std::size_t>(k)] * a[0];
            r[1] += w[static_cast<std::size_t>(k)] * a[1];
        }
        if (nonzero > 2) return "more than two weights at " + std::to_string(deg) + " degrees";
        if (nonzero == 2 && last - first != 1 && !(first == 0 && last == 7))
            return "non-adjacent axes at " + std::to_string(deg) + " degrees";
        worst = std::max({worst, std::abs(r[0] - u[0]), std::abs(r[1] - u[1])});
    }
    if (worst > 1e-12) return fmt("reconstruction error %.3g", worst);
    return {};
}

std::string check_nln() {
    std::vector<Stroke> strokes;
    for (int k = 0; k < 5; ++k) {
        const double y = 0.1 + 0.2 * k;
        strokes.emplace_back(std::vector<Point>{{0.02, y}, {0.3, y}});
    }
    strokes.emplace_back(std::vector<Point>{{0.1, 0.05}, {0.1, 0.95}});
    strokes.emplace_back(std::vector<Point>{{0.25, 0.05}, {0.25, 0.95}});
    const Ink ink(std::move(strokes));
    const int n = 64;
    const auto [mx, my] = nln_maps(ink, n);
    for (const CoordinateMap* m : {&mx, &my}) {
        for (std::size_t k = 1; k < m->knots.size(); ++k) {
            if (!(m->knots[k] > m->knots[k - 1])) return "coordinate map not strictly increasing";
        }
    }
    const Rect before = bounding_box(ink);
    const Rect after = bounding_box(apply_nln(ink, n));
    if (!(after.width() > before.width()))
        return fmt("x extent did not grow (after %.4f)", after.width());
    return {};
}

std::string check_gradients(double fault) {
    const ArchSpec spec = parse_arch("2x9x9-3C2-MP2-5N-4Output");
    double worst = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        GradCheckOptions o;
        o.fault = fault;
        worst = std::max(worst, grad_check(spec, seed, o).max_relative_error);
    }
    if (!(worst < 1e-4)) return fmt("max relative error %.3g", worst);
    return {};
}

std::string check_hsp() {
    {
        const std::vector<std::vector<double>> probs{{0.6, 0.3, 0.1}, {0.2, 0.7, 0.1}};
        const Prediction p = hsp_decide(2, 0.99, [&](std::size_t k) -> const std::vector<double>& { return probs[k]; });
        if (p.label != 1 || p.stage || p.members_evaluated != 2) return "fallback averaging example failed";
    }
    SynthConfig sc{4, 8, 0.03, derive_seed(7, "selfcheck-hsp")};
    const Dataset data = synth_dataset(sc);
    CascadeConfig cascade;
    cascade.class_table = data.class_table();
    int index = 0;
    for (const char name : {'A', 'C', 'F'}) {
        PipelineConfig pc = preset(name);
        pc.render.inner = 8;
        pc.render.outer = 12;
        const ArchSpec spec = parse_arch(resolve_arch("Mx12x12-4C3-MP2-8N-Output", pc.channels(), 4));
        cascade.members.push_back({std::string(1, name), pc, Network::init(spec, derive_seed(7, "selfcheck-member", index++))});
    }
    cascade.threshold = 2.0;
    const EvalReport never = evaluate(cascade, data, Method::hsp);
    const EvalReport average = evaluate(cascade, data, Method::average);
    if (never.decisions != average.decisions) return "HSP with an unreachable threshold differs from averaging";
    cascade.threshold = 0.0;
    const EvalReport always = evaluate(cascade, data, Method::hsp);
    const EvalReport single = evaluate(cascade, data, Method::single);
    if (always.decisions != single.decisions) return "HSP with threshold 0 differs from the first member";
    if (always.mean_members != 1.0) return "HSP with threshold 0 evaluated more than one member";
    return {};
}

} // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options) {
    const std::vector<std::pair<std::string, std::function<std::string()>>> checks{
        {"signature-segment", check_segment_signature},
        {"signature-algebra", check_signature_algebra},
        {"dir8-reconstruction", check_dir8},
        {"nln-monotone", check_nln},
        {"gradient-check", [&] { return check_gradients(options.gradient_fault); }},
        {"hsp-equivalence", check_hsp},
    };
    std::vector<CheckResult> results;
    for (const auto& [name, fn] : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r{name, false, {}, 0.0};
        try {
            r.detail = fn();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = std::string("threw: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(std::move(r));
    }
    return results;
}

bool print_checks(const std::vector<CheckResult>& results, std::ostream& out) {
    std::size_t passed = 0;
    for (const CheckResult& r : results) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4s %-22s %7.3fs", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
        out << line;
        if (!r.passed) out << "  " << r.detail;
        out << '\n';
        passed += r.passed;
    }
    out << passed << "/" << results.size() << " checks passed\n";
    return passed == results.size();
}

} // namespace inkdk
