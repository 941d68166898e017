#include "spikebayes/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikebayes/errors.hpp"

namespace spikebayes {

const char* to_string(ScalarField field) {
    return field == ScalarField::real ? "real" : "complex";
}

ScalarField scalar_field_from_string(const std::string& name) {
    if (name == "real") return ScalarField::real;
    if (name == "complex") return ScalarField::complex;
    throw InvalidArgument("unknown scalar field '" + name + "'");
}

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw InvalidArgument("domain dimension must be >= 1");
    if (lower_.size() != upper_.size())
        throw DimensionMismatch("domain lower/upper bounds differ in length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
            throw InvalidArgument("domain requires finite lower[i] < upper[i]");
    }
}

bool Domain::contains(std::span<const double> y) const {
    if (y.size() != dim()) return false;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] >= lower_[i] && y[i] <= upper_[i])) return false;
    }
    return true;
}

double Domain::diameter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) s += width(i) * width(i);
    return std::sqrt(s);
}

double Domain::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= width(i);
    return v;
}

void Domain::reflect(std::span<double> y) const {
    for (std::size_t i = 0; i < dim(); ++i) {
        const double lo = lower_[i];
        const double w = width(i);
        // Fold onto the period-2w sawtooth.
        double t = std::fmod(y[i] - lo, 2.0 * w);
        if (t < 0.0) t += 2.0 * w;
        if (t > w) t = 2.0 * w - t;
        y[i] = std::clamp(lo + t, lo, upper_[i]);
    }
}

double amplitude_norm(std::span<const Scalar> q) {
    double s = 0.0;
    for (const auto& c : q) s += std::norm(c);
    return std::sqrt(s);
}

Scalar inner(std::span<const Scalar> a, std::span<const Scalar> b) {
    Scalar s{0.0, 0.0};
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::conj(b[j]);
    return s;
}

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::size_t amp_dim, ScalarField field)
    : dim_(dim), amp_dim_(amp_dim), field_(field) {
    if (dim == 0) throw InvalidArgument("measure location dimension must be >= 1");
    if (amp_dim == 0) throw InvalidArgument("measure amplitude dimension must be >= 1");
}

void DiscreteMeasure::check_atom(std::span<const double> y, std::span<const Scalar> q) const {
    if (y.size() != dim_) throw DimensionMismatch("atom location has wrong dimension");
    if (q.size() != amp_dim_) throw DimensionMismatch("atom amplitude has wrong dimension");
    if (field_ == ScalarField::real) {
        for (const auto& c : q) {
            if (c.imag() != 0.0) throw DimensionMismatch("complex amplitude in a real-field measure");
        }
    }
}

void DiscreteMeasure::push_back(std::span<const double> y, std::span<const Scalar> q) {
    insert(size(), y, q);
}

void DiscreteMeasure::push_back(std::span<const double> y, double q) {
    const Scalar c{q, 0.0};
    push_back(y, std::span<const Scalar>(&c, 1));
}

void DiscreteMeasure::insert(std::size_t pos, std::span<const double> y, std::span<const Scalar> q) {
    check_atom(y, q);
    if (pos > size()) throw InvalidArgument("insert position out of range");
    locations_.insert(locations_.begin() + static_cast<std::ptrdiff_t>(pos * dim_), y.begin(), y.end());
    amplitudes_.insert(amplitudes_.begin() + static_cast<std::ptrdiff_t>(pos * amp_dim_), q.begin(),
                       q.end());
}

void DiscreteMeasure::erase(std::size_t k) {
    if (k >= size()) throw InvalidArgument("erase index out of range");
    const auto l0 = locations_.begin() + static_cast<std::ptrdiff_t>(k * dim_);
    locations_.erase(l0, l0 + static_cast<std::ptrdiff_t>(dim_));
    const auto a0 = amplitudes_.begin() + static_cast<std::ptrdiff_t>(k * amp_dim_);
    amplitudes_.erase(a0, a0 + static_cast<std::ptrdiff_t>(amp_dim_));
}

bool DiscreteMeasure::inside(const Domain& domain) const {
    if (domain.dim() != dim_) return false;
    for (std::size_t k = 0; k < size(); ++k) {
        if (!domain.contains(location(k))) return false;
    }
    return true;
}

bool DiscreteMeasure::compatible_with(const DiscreteMeasure& other) const {
    return dim_ == other.dim_ && amp_dim_ == other.amp_dim_ && field_ == other.field_;
}

TestFunction::TestFunction(std::size_t amp_dim, Evaluator evaluator)
    : amp_dim_(amp_dim), evaluator_(std::move(evaluator)) {
    if (amp_dim == 0) throw InvalidArgument("test function amplitude dimension must be >= 1");
}

std::vector<Scalar> TestFunction::operator()(std::span<const double> y) const {
    std::vector<Scalar> out(amp_dim_);
    evaluator_(y, out);
    return out;
}

TestFunction TestFunction::scalar(std::function<double(std::span<const double>)> f) {
    return TestFunction(1, [f = std::move(f)](std::span<const double> y, std::span<Scalar> out) {
        out[0] = Scalar{f(y), 0.0};
    });
}

TestFunction TestFunction::constant(double value) {
    return scalar([value](std::span<const double>) { return value; });
}

TestFunction TestFunction::linear(double offset, std::vector<double> slope) {
    return scalar([offset, slope = std::move(slope)](std::span<const double> y) {
        double s = offset;
        for (std::size_t i = 0; i < std::min(y.size(), slope.size()); ++i) s += slope[i] * y[i];
        return s;
    });
}

TestFunction TestFunction::sine(double frequency) {
    return scalar([frequency](std::span<const double> y) {
        return std::sin(M_PI * frequency * y[0]);
    });
}

TestFunction TestFunction::gaussian_bump(std::vector<double> center, double width, double height) {
    if (!(width > 0.0)) throw InvalidArgument("gaussian bump width must be positive");
    return scalar([center = std::move(center), width, height](std::span<const double> y) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) r2 += (y[i] - center[i]) * (y[i] - center[i]);
        return height * std::exp(-r2 / (2.0 * width * width));
    });
}

double total_variation(const DiscreteMeasure& u) {
    double tv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) tv += amplitude_norm(u.amplitude(k));
    return tv;
}

Scalar pair(const DiscreteMeasure& u, const TestFunction& f) {
    if (f.amp_dim() != u.amp_dim())
        throw DimensionMismatch("test function and measure amplitude dimensions differ");
    std::vector<Scalar> value(u.amp_dim());
    Scalar s{0.0, 0.0};
    for (std::size_t k = 0; k < u.size(); ++k) {
        f.evaluate(u.location(k), value);
        s += inner(value, u.amplitude(k));
    }
    return s;
}

DiscreteMeasure linear_combine(Scalar a, const DiscreteMeasure& u, Scalar b, const DiscreteMeasure& v) {
    if (!u.compatible_with(v)) throw DimensionMismatch("measures differ in d, m or scalar field");
    if (u.field() == ScalarField::real && (a.imag() != 0.0 || b.imag() != 0.0))
        throw DimensionMismatch("complex coefficient applied to real-field measures");
    DiscreteMeasure out(u.dim(), u.amp_dim(), u.field());
    std::vector<Scalar> q(u.amp_dim());
    auto append = [&](Scalar c, const DiscreteMeasure& w) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto src = w.amplitude(k);
            std::transform(src.begin(), src.end(), q.begin(), [c](Scalar x) { return c * x; });
            out.push_back(w.location(k), q);
        }
    };
    append(a, u);
    append(b, v);
    return out;
}

DiscreteMeasure normalize_atoms(const DiscreteMeasure& u, double tol) {
    if (!(tol >= 0.0)) throw InvalidArgument("normalize_atoms tolerance must be >= 0");
    std::vector<std::size_t> representative;  // index into u of each cluster's first atom
    std::vector<std::vector<Scalar>> sums;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const auto y = u.location(k);
        std::size_t cluster = representative.size();
        for (std::size_t c = 0; c < representative.size(); ++c) {
            const auto r = u.location(representative[c]);
            double dist = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) dist = std::max(dist, std::abs(y[i] - r[i]));
            if (dist <= tol) {
                cluster = c;
                break;
            }
        }
        const auto q = u.amplitude(k);
        if (cluster == representative.size()) {
            representative.push_back(k);
            sums.emplace_back(q.begin(), q.end());
        } else {
            for (std::size_t j = 0; j < q.size(); ++j) sums[cluster][j] += q[j];
        }
    }
    DiscreteMeasure out(u.dim(), u.amp_dim(), u.field());
    for (std::size_t c = 0; c < representative.size(); ++c) {
        const double norm = amplitude_norm(sums[c]);
        if (norm <= tol) continue;
        out.push_back(u.location(representative[c]), sums[c]);
    }
    return out;
}

}  // namespace spikebayes
