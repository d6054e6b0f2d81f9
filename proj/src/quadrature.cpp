#include "replens/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace replens {

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21). Odd indices of kXgk are the
// Gauss abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.14887433898163121088482600112972,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.03255816230796472747881897245939,
    0.05475589657435199603138130024458,  0.07503967481091995276704314091619,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
    double a, b;
    double value;
    double error;
    double abs_value;
};

bool operator<(const Panel& x, const Panel& y) { return x.error < y.error; }

template <class F>
Panel gauss_kronrod21(const F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = 0.0;
    double resk = fc * kWgk[10];
    double resabs = std::abs(resk);
    std::array<double, 10> fv1{}, fv2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1)
            resg += kWg[j / 2] * (f1 + f2);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fc - reskh);
    for (int j = 0; j < 10; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double ah = std::abs(half);
    resk *= half;
    resabs *= ah;
    resasc *= ah;
    double err = std::abs((resk - resg * half));
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * resabs, err);
    return {a, b, resk, err, resabs};
}

struct AdaptiveSum {
    double value = 0.0;
    double error = 0.0;
    double abs_value = 0.0;
    bool converged = false;
    int evaluations = 0;
};

template <class F>
AdaptiveSum adaptive(const F& f, std::vector<double> edges, const QuadratureOptions& opts)
{
    std::vector<Panel> heap;
    AdaptiveSum out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        heap.push_back(gauss_kronrod21(f, edges[i], edges[i + 1]));
        out.evaluations += 21;
    }
    std::make_heap(heap.begin(), heap.end());

    auto totals = [&heap]() {
        double v = 0.0, e = 0.0, s = 0.0, cv = 0.0;
        for (const auto& p : heap) {
            // Neumaier summation keeps the panel sum exact enough for 1e-13 targets.
            const double t = v + p.value;
            cv += std::abs(v) >= std::abs(p.value) ? (v - t) + p.value : (p.value - t) + v;
            v = t;
            e += p.error;
            s += p.abs_value;
        }
        return std::array<double, 3>{v + cv, e, s};
    };

    auto [value, error, abs_value] = totals();
    while (true) {
        const double target = std::max(opts.abs_tol, opts.rel_tol * abs_value);
        if (error <= target) {
            out.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= opts.max_panels)
            break;
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        const Panel left = gauss_kronrod21(f, worst.a, mid);
        const Panel right = gauss_kronrod21(f, mid, worst.b);
        out.evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
        if (heap.size() % 64 == 0) {
            const auto t = totals();
            value = t[0];
            error = t[1];
            abs_value = t[2];
        }
    }
    const auto t = totals();
    out.value = t[0];
    out.error = t[1];
    out.abs_value = t[2];
    if (!out.converged)
        out.converged = out.error <= std::max(opts.abs_tol, opts.rel_tol * out.abs_value);
    return out;
}

QuadratureResult to_log_result(const AdaptiveSum& s, double shift)
{
    QuadratureResult r;
    r.sign = s.value > 0.0 ? 1 : (s.value < 0.0 ? -1 : 0);
    r.log_abs = shift + std::log(std::abs(s.value));
    r.log_abs_error = shift + std::log(s.error);
    r.converged = s.converged;
    r.evaluations = s.evaluations;
    return r;
}

[[noreturn]] void throw_no_convergence(const QuadratureResult& r)
{
    std::ostringstream os;
    os << "quadrature did not converge after " << r.evaluations << " evaluations (log error "
       << r.log_abs_error << ", log value " << r.log_abs << ")";
    throw QuadratureError(QuadratureError::Kind::no_convergence, os.str());
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Signed log-sum-exp over terms sign_i * exp(log_i).
QuadratureResult signed_log_sum(const std::vector<std::pair<int, double>>& terms)
{
    double top = -kInf;
    for (const auto& [s, l] : terms)
        if (s != 0)
            top = std::max(top, l);
    QuadratureResult r;
    if (!std::isfinite(top))
        return r;
    double acc = 0.0;
    for (const auto& [s, l] : terms)
        if (s != 0)
            acc += s * std::exp(l - top);
    r.sign = acc > 0.0 ? 1 : (acc < 0.0 ? -1 : 0);
    r.log_abs = top + std::log(std::abs(acc));
    r.log_abs_error = r.log_abs + std::log(16.0 * kEps);
    return r;
}

// Closed form of the integral of exp(gamma y^2) y^k g(y) for a normalized Gaussian g, obtained by
// completing the square: with b = a - 2 gamma and c = a m / b the weighted density is
// sqrt(a/b) exp(a gamma m^2 / b) N(c, 1/b).
std::pair<int, double> gaussian_moment(const GaussianDatum& g, double gamma, int k)
{
    const double b = g.a - 2.0 * gamma;
    const double c = g.a * g.m / b;
    const double log_m0 = 0.5 * std::log(g.a / b) + g.a * gamma * g.m * g.m / b;
    switch (k) {
    case 0:
        return {1, log_m0};
    case 1:
        return {c > 0.0 ? 1 : (c < 0.0 ? -1 : 0), log_m0 + std::log(std::abs(c))};
    default:
        return {1, log_m0 + std::log(1.0 / b + c * c)};
    }
}

QuadratureResult analytic_moment(const InitialDatum& d, double gamma, int k)
{
    if (const auto* g = std::get_if<GaussianDatum>(&d))
        return signed_log_sum({gaussian_moment(*g, gamma, k)});
    if (const auto* mix = std::get_if<MixtureDatum>(&d)) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t i = 0; i < mix->components.size(); ++i) {
            auto [s, l] = gaussian_moment(mix->components[i], gamma, k);
            terms.emplace_back(s, l + std::log(mix->weights[i]));
        }
        return signed_log_sum(terms);
    }
    throw std::invalid_argument("analytic moments exist only for Gaussian and mixture data");
}

struct Peak {
    double x;
    double value;
};

Peak refine_max(const std::function<double(double)>& f, double lo, double hi, Peak best)
{
    // Golden-section search for the peak of a log-concave-ish profile bracketed by samples.
    constexpr double kR = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kR * (b - a), x2 = a + kR * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 80 && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kR * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kR * (b - a);
            f1 = f(x1);
        }
    }
    if (f1 > best.value)
        best = {x1, f1};
    if (f2 > best.value)
        best = {x2, f2};
    return best;
}

} // namespace

double default_tolerance()
{
    if (const char* env = std::getenv("REPLENS_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v > 0.0 && std::isfinite(v))
            return v;
    }
    return 1e-11;
}

QuadratureOptions default_quadrature_options()
{
    QuadratureOptions o;
    o.rel_tol = default_tolerance();
    return o;
}

double truncation_sigmas(double rel_tol) { return std::sqrt(2.0 * std::log(10.0 / rel_tol)) + 4.0; }

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts)
{
    if (hi < lo) {
        QuadratureResult r = integrate(f, hi, lo, opts);
        r.sign = -r.sign;
        return r;
    }
    if (hi == lo)
        return {};

    AdaptiveSum s;
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
        auto g = [&f](double u) {
            const double d = 1.0 - u * u;
            const double y = u / d;
            if (!std::isfinite(y))
                return 0.0;
            return f(y) * (1.0 + u * u) / (d * d);
        };
        s = adaptive(g, {-1.0, 0.0, 1.0}, opts);
    } else if (hi_inf) {
        auto g = [&f, lo](double u) {
            const double d = 1.0 - u;
            const double y = lo + u / d;
            if (!std::isfinite(y))
                return 0.0;
            return f(y) / (d * d);
        };
        s = adaptive(g, {0.0, 1.0}, opts);
    } else if (lo_inf) {
        auto g = [&f, hi](double u) {
            const double d = 1.0 - u;
            const double y = hi - u / d;
            if (!std::isfinite(y))
                return 0.0;
            return f(y) / (d * d);
        };
        s = adaptive(g, {0.0, 1.0}, opts);
    } else {
        s = adaptive(f, {lo, hi}, opts);
    }
    QuadratureResult r = to_log_result(s, 0.0);
    if (!r.converged)
        throw_no_convergence(r);
    return r;
}

QuadratureResult integrate_log(const std::function<double(double)>& log_weight,
                               const std::function<double(double)>& factor, Interval domain,
                               std::span<const double> breaks, const QuadratureOptions& opts)
{
    if (!(domain.hi > domain.lo))
        return {};
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi))
        throw std::invalid_argument("integrate_log needs a finite domain");

    std::vector<double> edges{domain.lo, domain.hi};
    for (double b : breaks)
        if (b > domain.lo && b < domain.hi)
            edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    constexpr int kSamples = 257;
    const double h = domain.width() / (kSamples - 1);
    std::vector<double> samples(kSamples);
    double shift = -kInf;
    for (int i = 0; i < kSamples; ++i) {
        samples[i] = log_weight(domain.lo + i * h);
        shift = std::max(shift, samples[i]);
    }
    for (double e : edges)
        shift = std::max(shift, log_weight(e));
    if (!std::isfinite(shift)) {
        if (shift > 0.0)
            throw QuadratureError(QuadratureError::Kind::divergent, "integrand overflows");
        QuadratureResult zero;
        zero.evaluations = kSamples;
        return zero;
    }

    // Refine every relevant local maximum; peaks much narrower than the sample spacing get a
    // geometric ladder of breakpoints so the first panels cannot step over them.
    constexpr double kRelevant = 80.0;
    std::vector<Peak> peaks;
    for (int i = 0; i < kSamples; ++i) {
        const double left = i > 0 ? samples[i - 1] : -kInf;
        const double right = i + 1 < kSamples ? samples[i + 1] : -kInf;
        if (!(samples[i] > left && samples[i] >= right && samples[i] > shift - kRelevant))
            continue;
        const double a = domain.lo + std::max(i - 1, 0) * h;
        const double b = domain.lo + std::min(i + 1, kSamples - 1) * h;
        peaks.push_back(refine_max(log_weight, a, b, {domain.lo + i * h, samples[i]}));
    }
    for (const Peak& p : peaks) {
        shift = std::max(shift, p.value);
        if (p.x > domain.lo && p.x < domain.hi)
            edges.push_back(p.x);
        for (double dir : {-1.0, 1.0}) {
            for (double d = 0.5 * h; d > 1e-15 * (1.0 + std::abs(p.x)); d *= 0.5) {
                const double y = p.x + dir * d;
                if (y <= domain.lo || y >= domain.hi)
                    continue;
                if (log_weight(y) >= p.value - 2.0)
                    break;
                edges.push_back(y);
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    auto g = [&](double y) {
        const double lw = log_weight(y);
        if (lw == -kInf)
            return 0.0;
        const double w = std::exp(lw - shift);
        return factor ? factor(y) * w : w;
    };
    QuadratureOptions shifted = opts;
    shifted.abs_tol = opts.abs_tol > 0.0 ? opts.abs_tol * std::exp(-shift) : 0.0;
    const AdaptiveSum s = adaptive(g, std::move(edges), shifted);
    QuadratureResult r = to_log_result(s, shift);
    r.evaluations += kSamples;
    if (!r.converged)
        throw_no_convergence(r);
    return r;
}

bool detect_divergence(const InitialDatum& d, double gamma, double window)
{
    if (!(gamma > 0.0))
        return false;
    auto gaussian_rule = [gamma, window](double rate) { return gamma >= 0.5 * rate - window; };
    const TailClass tc = classify_tail(d);
    return std::visit(overloaded{
                          [](const tail::CompactSupport&) { return false; },
                          [gamma](const tail::SuperGaussian&) { return !std::isfinite(gamma); },
                          [&](const tail::Gaussian& g) { return gaussian_rule(g.rate); },
                          [](const tail::SubGaussian&) { return true; },
                      },
                      tc);
}

double probe_tail_rate(const InitialDatum& d)
{
    const Interval dom = effective_domain(d, 0.0, 8.0);
    const double center = 0.5 * (dom.lo + dom.hi);
    const double scale = std::max(1.0, dom.width());
    constexpr int kDoublings = 40;

    double slowest = kInf;
    for (double side : {-1.0, 1.0}) {
        auto ell = [&](int j) { return log_density(d, center + side * scale * std::ldexp(1.0, j)); };
        if (!std::isfinite(ell(1)))
            continue;
        int j = 1;
        while (j < kDoublings && std::isfinite(ell(j + 1)))
            ++j;
        // The density is representable at scale * 2^(j-1) and scale * 2^j.
        const double r1 = scale * std::ldexp(1.0, j - 1), r2 = scale * std::ldexp(1.0, j);
        const double rate = 2.0 * (ell(j - 1) - ell(j)) / (r2 * r2 - r1 * r1);
        slowest = std::min(slowest, std::max(rate, 0.0));
    }
    return slowest;
}

bool probe_divergence(const InitialDatum& d, double gamma, double window)
{
    if (!(gamma > 0.0))
        return false;
    const double rate = probe_tail_rate(d);
    if (std::isinf(rate))
        return !std::isfinite(gamma);
    return gamma >= 0.5 * rate - window;
}

QuadratureResult weighted_moment(const InitialDatum& d, double gamma, int k, const MomentOptions& opts)
{
    if (k < 0 || k > 2)
        throw std::invalid_argument("weighted_moment supports k = 0, 1, 2");
    if (detect_divergence(d, gamma, opts.divergence_window)) {
        std::ostringstream os;
        os.precision(17);
        os << "weighted integral with gamma = " << gamma << " diverges for tail " << to_string(classify_tail(d));
        throw QuadratureError(QuadratureError::Kind::divergent, os.str());
    }

    const bool gaussian_like = std::holds_alternative<GaussianDatum>(d) || std::holds_alternative<MixtureDatum>(d);
    if (opts.method == MomentMethod::analytic || (opts.method == MomentMethod::automatic && gaussian_like))
        return analytic_moment(d, gamma, k);

    const Interval dom = effective_domain(d, gamma, truncation_sigmas(opts.quad.rel_tol));
    if (!std::isfinite(dom.lo) || !std::isfinite(dom.hi))
        throw QuadratureError(QuadratureError::Kind::divergent, "weighted datum has no finite window");
    std::vector<double> breaks = breakpoints(d);
    if (gaussian_like) {
        const Interval core = effective_domain(d, gamma, 0.0);
        breaks.push_back(core.lo);
        breaks.push_back(core.hi);
    }
    auto log_weight = [&d, gamma](double y) { return gamma * y * y + log_density(d, y); };
    std::function<double(double)> factor;
    if (k == 1)
        factor = [](double y) { return y; };
    else if (k == 2)
        factor = [](double y) { return y * y; };
    return integrate_log(log_weight, factor, dom, breaks, opts.quad);
}

} // namespace replens
