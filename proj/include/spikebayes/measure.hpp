#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spikebayes {

using Scalar = std::complex<double>;

enum class ScalarField { real, complex };

const char* to_string(ScalarField field);
ScalarField scalar_field_from_string(const std::string& name);

/// Axis-aligned compact box in R^d.
class Domain {
public:
    Domain(std::vector<double> lower, std::vector<double> upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> upper() const noexcept { return upper_; }
    double width(std::size_t axis) const { return upper_[axis] - lower_[axis]; }

    bool contains(std::span<const double> y) const;
    double diameter() const;
    double volume() const;

    /// Reflects a point back into the box (mirror at each face, repeated if needed).
    void reflect(std::span<double> y) const;

    bool operator==(const Domain&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Euclidean (complex-modulus) norm of an amplitude vector.
double amplitude_norm(std::span<const Scalar> q);

/// Hilbert inner product (a, b) = sum_j a_j conj(b_j).
Scalar inner(std::span<const Scalar> a, std::span<const Scalar> b);

/// Finite list of atoms q_k delta_{y_k}. Locations and amplitudes are stored
/// in flat row-major buffers; an empty measure is valid.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::size_t dim, std::size_t amp_dim, ScalarField field = ScalarField::real);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : locations_.size() / dim_; }
    bool empty() const noexcept { return locations_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t amp_dim() const noexcept { return amp_dim_; }
    ScalarField field() const noexcept { return field_; }

    std::span<const double> location(std::size_t k) const {
        return {locations_.data() + k * dim_, dim_};
    }
    std::span<double> location(std::size_t k) { return {locations_.data() + k * dim_, dim_}; }
    std::span<const Scalar> amplitude(std::size_t k) const {
        return {amplitudes_.data() + k * amp_dim_, amp_dim_};
    }
    std::span<Scalar> amplitude(std::size_t k) {
        return {amplitudes_.data() + k * amp_dim_, amp_dim_};
    }

    /// Appends an atom. Real-field measures reject amplitudes with nonzero imaginary part.
    void push_back(std::span<const double> y, std::span<const Scalar> q);
    void push_back(std::span<const double> y, double q);
    void insert(std::size_t pos, std::span<const double> y, std::span<const Scalar> q);
    void erase(std::size_t k);

    /// True when every atom location lies in the box.
    bool inside(const Domain& domain) const;
    bool compatible_with(const DiscreteMeasure& other) const;

    bool operator==(const DiscreteMeasure&) const = default;

private:
    void check_atom(std::span<const double> y, std::span<const Scalar> q) const;

    std::size_t dim_;
    std::size_t amp_dim_;
    ScalarField field_;
    std::vector<double> locations_;
    std::vector<Scalar> amplitudes_;
};

/// Continuous map from the domain into amplitude space, used for pairings.
class TestFunction {
public:
    using Evaluator = std::function<void(std::span<const double> y, std::span<Scalar> out)>;

    TestFunction(std::size_t amp_dim, Evaluator evaluator);

    std::size_t amp_dim() const noexcept { return amp_dim_; }
    void evaluate(std::span<const double> y, std::span<Scalar> out) const { evaluator_(y, out); }
    std::vector<Scalar> operator()(std::span<const double> y) const;

    /// Scalar function (m = 1) from a real callable.
    static TestFunction scalar(std::function<double(std::span<const double>)> f);
    static TestFunction constant(double value);
    /// f(y) = offset + sum_i slope_i * y_i
    static TestFunction linear(double offset, std::vector<double> slope);
    /// f(y) = sin(pi * frequency * y_0)
    static TestFunction sine(double frequency);
    /// f(y) = height * exp(-|y - center|^2 / (2 width^2))
    static TestFunction gaussian_bump(std::vector<double> center, double width, double height = 1.0);

private:
    std::size_t amp_dim_;
    Evaluator evaluator_;
};

/// Sum of amplitude norms.
double total_variation(const DiscreteMeasure& u);

/// Duality pairing sum_k (f(y_k), q_k)_H.
Scalar pair(const DiscreteMeasure& u, const TestFunction& f);

/// a*u + b*v as a concatenated atom list; coincident atoms are kept separate.
DiscreteMeasure linear_combine(Scalar a, const DiscreteMeasure& u, Scalar b, const DiscreteMeasure& v);

/// Merges atoms within `tol` (max-norm) of a cluster's first atom and drops
/// atoms with amplitude norm <= tol.
DiscreteMeasure normalize_atoms(const DiscreteMeasure& u, double tol);

}  // namespace spikebayes
