#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "spikebayes/measure.hpp"

namespace spikebayes {

/// Observation vector in R^{N_o} (imaginary parts zero) or C^{N_o}.
using Observation = std::vector<Scalar>;

/// Measurement locations x_1..x_{N_o}.
struct SensorSet {
    std::vector<std::vector<double>> points;

    std::size_t size() const noexcept { return points.size(); }
    /// Tensor grid with `counts[i]` equispaced points (endpoints included) along axis i.
    static SensorSet grid(const std::vector<double>& lower, const std::vector<double>& upper,
                          const std::vector<std::size_t>& counts);
    bool operator==(const SensorSet&) const = default;
};

/// Kernel values on a tensor grid of source locations, interpolated multilinearly.
/// values[(node * n_obs + sensor) * amp_dim + j]
struct TabulatedKernel {
    Domain domain;
    std::vector<std::size_t> grid_n;  // nodes per axis (>= 2)
    std::size_t n_obs = 0;
    std::size_t amp_dim = 1;
    ScalarField field = ScalarField::real;
    std::vector<Scalar> values;

    std::size_t node_count() const;
    bool operator==(const TabulatedKernel&) const = default;
};

/// Writes/reads the tabulated kernel CSV file (header block then one row per grid node).
void save_tabulated_kernel(const std::filesystem::path& path, const TabulatedKernel& table);
TabulatedKernel load_tabulated_kernel(const std::filesystem::path& path);

/// Weak*-continuous linear map from measures on the source domain to observations.
class ForwardModel {
public:
    virtual ~ForwardModel() = default;

    virtual const Domain& source_domain() const = 0;
    virtual std::size_t n_obs() const = 0;
    virtual std::size_t amp_dim() const = 0;
    virtual ScalarField output_field() const = 0;
    /// Writes G(u) into `out` (length n_obs).
    virtual void apply(const DiscreteMeasure& u, std::span<Scalar> out) const = 0;
    /// Lipschitz constant of y -> k(x_i, y) in the source location, maximized over sensors.
    virtual double lipschitz() const = 0;

    Observation operator()(const DiscreteMeasure& u) const;

protected:
    void check_input(const DiscreteMeasure& u) const;
};

class KernelForward final : public ForwardModel {
public:
    struct GaussianKernel {
        double sigma;
        bool operator==(const GaussianKernel&) const = default;
    };
    struct HelmholtzMonopole {
        double kappa;
        int space_dim;
        bool operator==(const HelmholtzMonopole&) const = default;
    };
    struct Tabulated {
        TabulatedKernel table;
        bool operator==(const Tabulated&) const = default;
    };
    using Kind = std::variant<GaussianKernel, HelmholtzMonopole, Tabulated>;

    /// k(x, y) = exp(-|x - y|^2 / (2 sigma^2)).
    static KernelForward gaussian_kernel(Domain source, SensorSet sensors, double sigma,
                                         ScalarField output_field = ScalarField::real);
    /// Free-space Green's function; sensors must stay a positive distance away from the source box.
    static KernelForward helmholtz_monopole(Domain source, SensorSet sensors, double kappa, int space_dim);
    static KernelForward tabulated(TabulatedKernel table);

    const Domain& source_domain() const override { return domain_; }
    std::size_t n_obs() const override;
    std::size_t amp_dim() const override;
    ScalarField output_field() const override { return field_; }
    void apply(const DiscreteMeasure& u, std::span<Scalar> out) const override;
    double lipschitz() const override { return lipschitz_; }

    /// Row k(x_i, y) in amplitude space (length amp_dim).
    void kernel_row(std::size_t sensor, std::span<const double> y, std::span<Scalar> row) const;
    const SensorSet& sensors() const noexcept { return sensors_; }
    const Kind& kind() const noexcept { return kind_; }

private:
    KernelForward(Domain domain, SensorSet sensors, Kind kind, ScalarField field);
    double compute_lipschitz() const;

    Domain domain_;
    SensorSet sensors_;
    Kind kind_;
    ScalarField field_;
    double lipschitz_ = 0.0;
};

/// Kernel evaluated at the nearest node of a uniform grid with `grid_n` cells per axis
/// (grid_n + 1 nodes per axis, endpoints included).
class DiscretizedForward final : public ForwardModel {
public:
    DiscretizedForward(std::shared_ptr<const KernelForward> base, std::size_t grid_n);

    const Domain& source_domain() const override { return base_->source_domain(); }
    std::size_t n_obs() const override { return base_->n_obs(); }
    std::size_t amp_dim() const override { return base_->amp_dim(); }
    ScalarField output_field() const override { return base_->output_field(); }
    void apply(const DiscreteMeasure& u, std::span<Scalar> out) const override;
    double lipschitz() const override { return base_->lipschitz(); }

    std::size_t grid_n() const noexcept { return grid_n_; }
    const KernelForward& base() const noexcept { return *base_; }
    /// Nearest grid node.
    void snap(std::span<const double> y, std::span<double> out) const;
    /// Coordinate of node `index` along `axis`.
    double node(std::size_t axis, std::size_t index) const;
    /// Largest Euclidean snapping distance.
    double max_snap_distance() const;
    /// Bound on sup-norm |G_N u - G u|: Lipschitz * max_snap_distance * TV(u).
    double error_bound(const DiscreteMeasure& u) const;

private:
    std::shared_ptr<const KernelForward> base_;
    std::size_t grid_n_;
};

Observation apply(const KernelForward& fwd, const DiscreteMeasure& u);
Observation apply_discretized(const DiscretizedForward& fwd, const DiscreteMeasure& u);

/// Free-space Helmholtz Green's function: e^{i kappa r}/(4 pi r) in 3-D, (i/4) H0^(1)(kappa r) in 2-D.
Scalar helmholtz_kernel(double kappa, int space_dim, std::span<const double> x, std::span<const double> y);

/// Uniform grid node list of a box with `grid_n` cells per axis, in row-major order (last axis fastest).
std::vector<std::vector<double>> grid_nodes(const Domain& domain, std::size_t grid_n);

}  // namespace spikebayes
