#include "spikebayes/forward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "spikebayes/bessel.hpp"
#include "spikebayes/errors.hpp"

namespace spikebayes {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

double distance_to_box(std::span<const double> x, const Domain& box) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::max({box.lower()[i] - x[i], 0.0, x[i] - box.upper()[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

void check_sensors(const SensorSet& sensors, std::size_t dim) {
    if (sensors.size() == 0) throw InvalidArgument("sensor set must contain at least one point");
    for (const auto& x : sensors.points)
        if (x.size() != dim) throw DimensionMismatch("sensor dimension differs from the source domain");
}

}  // namespace

SensorSet SensorSet::grid(const std::vector<double>& lower, const std::vector<double>& upper,
                          const std::vector<std::size_t>& counts) {
    if (lower.size() != upper.size() || lower.size() != counts.size() || lower.empty())
        throw DimensionMismatch("sensor grid bounds and counts must share one dimension");
    std::size_t total = 1;
    for (auto c : counts) {
        if (c == 0) throw InvalidArgument("sensor grid counts must be >= 1");
        total *= c;
    }
    SensorSet set;
    set.points.reserve(total);
    const std::size_t d = lower.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::vector<double> x(d);
        std::size_t rem = flat;
        for (std::size_t a = d; a-- > 0;) {
            const std::size_t idx = rem % counts[a];
            rem /= counts[a];
            x[a] = counts[a] == 1 ? 0.5 * (lower[a] + upper[a])
                                  : lower[a] + (upper[a] - lower[a]) * static_cast<double>(idx) /
                                                   static_cast<double>(counts[a] - 1);
        }
        set.points.push_back(std::move(x));
    }
    return set;
}

// ------------------------------------------------------------ tabulated

std::size_t TabulatedKernel::node_count() const {
    std::size_t n = 1;
    for (auto g : grid_n) n *= g;
    return n;
}

void save_tabulated_kernel(const std::filesystem::path& path, const TabulatedKernel& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tabulated kernel file " + path.string());
    out << std::setprecision(17);
    const std::size_t d = table.domain.dim();
    out << "tabulated_kernel,1\n" << "d," << d << "\nlower";
    for (double v : table.domain.lower()) out << ',' << v;
    out << "\nupper";
    for (double v : table.domain.upper()) out << ',' << v;
    out << "\ngrid_n";
    for (auto g : table.grid_n) out << ',' << g;
    out << "\nn_obs," << table.n_obs << "\namp_dim," << table.amp_dim << "\nfield," << to_string(table.field)
        << "\nvalues\n";
    const std::size_t row = table.n_obs * table.amp_dim;
    for (std::size_t node = 0; node < table.node_count(); ++node) {
        for (std::size_t e = 0; e < row; ++e) {
            const Scalar v = table.values[node * row + e];
            if (e > 0) out << ',';
            out << v.real();
            if (table.field == ScalarField::complex) out << ',' << v.imag();
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing tabulated kernel file " + path.string());
}

TabulatedKernel load_tabulated_kernel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tabulated kernel file " + path.string());
    auto fail = [&](const std::string& why) -> IoError {
        return IoError("malformed tabulated kernel file " + path.string() + ": " + why);
    };
    auto read_row = [&](const std::string& key) {
        std::string line;
        if (!std::getline(in, line)) throw fail("missing '" + key + "' line");
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        if (cell != key) throw fail("expected '" + key + "', found '" + cell + "'");
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    auto to_doubles = [&](const std::vector<std::string>& cells) {
        std::vector<double> v;
        try {
            for (const auto& c : cells) v.push_back(std::stod(c));
        } catch (const std::exception&) {
            throw fail("non-numeric entry");
        }
        return v;
    };
    try {
        if (read_row("tabulated_kernel") != std::vector<std::string>{"1"}) throw fail("unsupported version");
        const auto d = static_cast<std::size_t>(std::stoul(read_row("d").at(0)));
        auto lower = to_doubles(read_row("lower"));
        auto upper = to_doubles(read_row("upper"));
        std::vector<std::size_t> grid_n;
        for (const auto& c : read_row("grid_n")) grid_n.push_back(static_cast<std::size_t>(std::stoul(c)));
        const auto n_obs = static_cast<std::size_t>(std::stoul(read_row("n_obs").at(0)));
        const auto amp_dim = static_cast<std::size_t>(std::stoul(read_row("amp_dim").at(0)));
        const auto field = scalar_field_from_string(read_row("field").at(0));
        read_row("values");
        if (lower.size() != d || upper.size() != d || grid_n.size() != d) throw fail("dimension mismatch in header");
        TabulatedKernel table{Domain(std::move(lower), std::move(upper)), std::move(grid_n), n_obs, amp_dim, field, {}};
        const std::size_t row = n_obs * amp_dim;
        const std::size_t per_row = field == ScalarField::complex ? 2 * row : row;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            const auto v = to_doubles(cells);
            if (v.size() != per_row) throw fail("row has " + std::to_string(v.size()) + " entries, expected " +
                                                std::to_string(per_row));
            for (std::size_t e = 0; e < row; ++e)
                table.values.push_back(field == ScalarField::complex ? Scalar{v[2 * e], v[2 * e + 1]} : Scalar{v[e], 0.0});
        }
        if (table.values.size() != table.node_count() * row) throw fail("wrong number of value rows");
        return table;
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw fail(e.what());
    }
}

// --------------------------------------------------------- ForwardModel

Observation ForwardModel::operator()(const DiscreteMeasure& u) const {
    Observation out(n_obs());
    apply(u, out);
    return out;
}

void ForwardModel::check_input(const DiscreteMeasure& u) const {
    if (u.dim() != source_domain().dim()) throw DimensionMismatch("measure dimension differs from the source domain");
    if (u.amp_dim() != amp_dim()) throw DimensionMismatch("measure amplitude dimension differs from the kernel");
    if (u.field() == ScalarField::complex && output_field() == ScalarField::real)
        throw DimensionMismatch("complex measure applied to a real-valued forward operator");
}

// -------------------------------------------------------- KernelForward

KernelForward::KernelForward(Domain domain, SensorSet sensors, Kind kind, ScalarField field)
    : domain_(std::move(domain)), sensors_(std::move(sensors)), kind_(std::move(kind)), field_(field) {
    lipschitz_ = compute_lipschitz();
}

KernelForward KernelForward::gaussian_kernel(Domain source, SensorSet sensors, double sigma, ScalarField output_field) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian kernel sigma must be positive");
    check_sensors(sensors, source.dim());
    return KernelForward(std::move(source), std::move(sensors), GaussianKernel{sigma}, output_field);
}

KernelForward KernelForward::helmholtz_monopole(Domain source, SensorSet sensors, double kappa, int space_dim) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("helmholtz wavenumber must be positive");
    if (space_dim != 2 && space_dim != 3) throw InvalidArgument("helmholtz space dimension must be 2 or 3");
    if (source.dim() != static_cast<std::size_t>(space_dim))
        throw DimensionMismatch("helmholtz space dimension differs from the source domain");
    check_sensors(sensors, source.dim());
    for (const auto& x : sensors.points)
        if (!(distance_to_box(x, source) > 0.0))
            throw InvalidArgument("helmholtz sensors must lie at positive distance from the source domain");
    return KernelForward(std::move(source), std::move(sensors), HelmholtzMonopole{kappa, space_dim},
                         ScalarField::complex);
}

KernelForward KernelForward::tabulated(TabulatedKernel table) {
    if (table.grid_n.size() != table.domain.dim()) throw DimensionMismatch("tabulated grid dimension mismatch");
    for (auto g : table.grid_n)
        if (g < 2) throw InvalidArgument("tabulated kernel needs >= 2 nodes per axis");
    if (table.n_obs == 0 || table.amp_dim == 0) throw InvalidArgument("tabulated kernel needs n_obs, amp_dim >= 1");
    if (table.values.size() != table.node_count() * table.n_obs * table.amp_dim)
        throw DimensionMismatch("tabulated kernel value count does not match its header");
    Domain domain = table.domain;
    const ScalarField field = table.field;
    return KernelForward(std::move(domain), SensorSet{}, Tabulated{std::move(table)}, field);
}

std::size_t KernelForward::n_obs() const {
    if (const auto* t = std::get_if<Tabulated>(&kind_)) return t->table.n_obs;
    return sensors_.size();
}

std::size_t KernelForward::amp_dim() const {
    if (const auto* t = std::get_if<Tabulated>(&kind_)) return t->table.amp_dim;
    return 1;
}

void KernelForward::kernel_row(std::size_t sensor, std::span<const double> y, std::span<Scalar> row) const {
    std::visit(overloaded{
                   [&](const GaussianKernel& g) {
                       const double r2 = squared_distance(sensors_.points[sensor], y);
                       row[0] = Scalar{std::exp(-r2 / (2.0 * g.sigma * g.sigma)), 0.0};
                   },
                   [&](const HelmholtzMonopole& h) {
                       row[0] = helmholtz_kernel(h.kappa, h.space_dim, sensors_.points[sensor], y);
                   },
                   [&](const Tabulated& t) {
                       const auto& tab = t.table;
                       const std::size_t d = tab.domain.dim();
                       std::vector<std::size_t> cell(d);
                       std::vector<double> frac(d);
                       for (std::size_t a = 0; a < d; ++a) {
                           const double h = tab.domain.width(a) / static_cast<double>(tab.grid_n[a] - 1);
                           const double s = std::clamp((y[a] - tab.domain.lower()[a]) / h, 0.0,
                                                       static_cast<double>(tab.grid_n[a] - 1));
                           cell[a] = std::min(static_cast<std::size_t>(s), tab.grid_n[a] - 2);
                           frac[a] = s - static_cast<double>(cell[a]);
                       }
                       std::fill(row.begin(), row.end(), Scalar{});
                       const std::size_t stride = tab.n_obs * tab.amp_dim;
                       for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
                           double w = 1.0;
                           std::size_t node = 0;
                           for (std::size_t a = 0; a < d; ++a) {
                               const bool up = (corner >> a) & 1U;
                               w *= up ? frac[a] : 1.0 - frac[a];
                               node = node * tab.grid_n[a] + cell[a] + (up ? 1 : 0);
                           }
                           if (w == 0.0) continue;
                           const Scalar* v = tab.values.data() + node * stride + sensor * tab.amp_dim;
                           for (std::size_t j = 0; j < tab.amp_dim; ++j) row[j] += w * v[j];
                       }
                   },
               },
               kind_);
}

void KernelForward::apply(const DiscreteMeasure& u, std::span<Scalar> out) const {
    check_input(u);
    if (out.size() != n_obs()) throw DimensionMismatch("observation buffer has wrong length");
    std::fill(out.begin(), out.end(), Scalar{});
    const std::size_t m = amp_dim();
    std::vector<Scalar> row(m);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const auto y = u.location(k);
        const auto q = u.amplitude(k);
        for (std::size_t i = 0; i < out.size(); ++i) {
            kernel_row(i, y, row);
            Scalar s{};
            for (std::size_t j = 0; j < m; ++j) s += row[j] * q[j];
            out[i] += s;
        }
    }
}

double KernelForward::compute_lipschitz() const {
    return std::visit(
        overloaded{
            [](const GaussianKernel& g) {
                // max_r (r / sigma^2) exp(-r^2 / (2 sigma^2)) at r = sigma.
                return 1.0 / (g.sigma * std::sqrt(std::exp(1.0)));
            },
            [&](const HelmholtzMonopole& h) {
                double r_min = INFINITY;
                for (const auto& x : sensors_.points) r_min = std::min(r_min, distance_to_box(x, domain_));
                if (h.space_dim == 3)
                    return std::sqrt(h.kappa * h.kappa * r_min * r_min + 1.0) / (4.0 * M_PI * r_min * r_min);
                // |d/dr (i/4) H0(kappa r)| = (kappa/4) |H1(kappa r)|, decreasing in r.
                return 0.25 * h.kappa * std::abs(bessel::hankel1_1(h.kappa * r_min));
            },
            [](const Tabulated& t) {
                const auto& tab = t.table;
                const std::size_t d = tab.domain.dim();
                const std::size_t stride = tab.n_obs * tab.amp_dim;
                std::vector<double> h(d);
                std::size_t cells = 1;
                for (std::size_t a = 0; a < d; ++a) {
                    h[a] = tab.domain.width(a) / static_cast<double>(tab.grid_n[a] - 1);
                    cells *= tab.grid_n[a] - 1;
                }
                auto node_index = [&](const std::vector<std::size_t>& idx) {
                    std::size_t n = 0;
                    for (std::size_t a = 0; a < d; ++a) n = n * tab.grid_n[a] + idx[a];
                    return n;
                };
                double best = 0.0;
                std::vector<std::size_t> base(d), lo(d), hi(d);
                for (std::size_t c = 0; c < cells; ++c) {
                    std::size_t rem = c;
                    for (std::size_t a = d; a-- > 0;) {
                        base[a] = rem % (tab.grid_n[a] - 1);
                        rem /= tab.grid_n[a] - 1;
                    }
                    for (std::size_t sensor = 0; sensor < tab.n_obs; ++sensor) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < tab.amp_dim; ++j) {
                            for (std::size_t axis = 0; axis < d; ++axis) {
                                double max_diff = 0.0;
                                for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
                                    if ((corner >> axis) & 1U) continue;
                                    for (std::size_t a = 0; a < d; ++a) {
                                        lo[a] = base[a] + ((corner >> a) & 1U);
                                        hi[a] = lo[a];
                                    }
                                    hi[axis] += 1;
                                    const std::size_t off = sensor * tab.amp_dim + j;
                                    const Scalar diff = tab.values[node_index(hi) * stride + off] -
                                                        tab.values[node_index(lo) * stride + off];
                                    max_diff = std::max(max_diff, std::abs(diff));
                                }
                                s += (max_diff / h[axis]) * (max_diff / h[axis]);
                            }
                        }
                        best = std::max(best, std::sqrt(s));
                    }
                }
                return best;
            },
        },
        kind_);
}

// --------------------------------------------------- DiscretizedForward

DiscretizedForward::DiscretizedForward(std::shared_ptr<const KernelForward> base, std::size_t grid_n)
    : base_(std::move(base)), grid_n_(grid_n) {
    if (!base_) throw InvalidArgument("discretized forward needs a base operator");
    if (grid_n_ == 0) throw InvalidArgument("grid_n must be >= 1");
}

double DiscretizedForward::node(std::size_t axis, std::size_t index) const {
    const Domain& dom = source_domain();
    return dom.lower()[axis] + dom.width(axis) * static_cast<double>(index) / static_cast<double>(grid_n_);
}

void DiscretizedForward::snap(std::span<const double> y, std::span<double> out) const {
    const Domain& dom = source_domain();
    for (std::size_t a = 0; a < dom.dim(); ++a) {
        const double t = (y[a] - dom.lower()[a]) / dom.width(a) * static_cast<double>(grid_n_);
        const double idx = std::clamp(std::round(t), 0.0, static_cast<double>(grid_n_));
        out[a] = node(a, static_cast<std::size_t>(idx));
    }
}

double DiscretizedForward::max_snap_distance() const {
    const Domain& dom = source_domain();
    double s = 0.0;
    for (std::size_t a = 0; a < dom.dim(); ++a) {
        const double half = 0.5 * dom.width(a) / static_cast<double>(grid_n_);
        s += half * half;
    }
    return std::sqrt(s);
}

double DiscretizedForward::error_bound(const DiscreteMeasure& u) const {
    return lipschitz() * max_snap_distance() * total_variation(u);
}

void DiscretizedForward::apply(const DiscreteMeasure& u, std::span<Scalar> out) const {
    check_input(u);
    DiscreteMeasure snapped(u.dim(), u.amp_dim(), u.field());
    std::vector<double> y(u.dim());
    for (std::size_t k = 0; k < u.size(); ++k) {
        snap(u.location(k), y);
        snapped.push_back(y, u.amplitude(k));
    }
    base_->apply(snapped, out);
}

Observation apply(const KernelForward& fwd, const DiscreteMeasure& u) { return fwd(u); }

Observation apply_discretized(const DiscretizedForward& fwd, const DiscreteMeasure& u) { return fwd(u); }

Scalar helmholtz_kernel(double kappa, int space_dim, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("helmholtz kernel points differ in dimension");
    const double r = std::sqrt(squared_distance(x, y));
    if (!(r > 0.0)) throw InvalidArgument("helmholtz kernel is singular at r = 0");
    if (space_dim == 3) return std::exp(Scalar{0.0, kappa * r}) / (4.0 * M_PI * r);
    if (space_dim == 2) return Scalar{0.0, 0.25} * bessel::hankel1_0(kappa * r);
    throw InvalidArgument("helmholtz space dimension must be 2 or 3");
}

std::vector<std::vector<double>> grid_nodes(const Domain& domain, std::size_t grid_n) {
    if (grid_n == 0) throw InvalidArgument("grid_n must be >= 1");
    const std::size_t d = domain.dim();
    const std::size_t per_axis = grid_n + 1;
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= per_axis;
    std::vector<std::vector<double>> nodes;
    nodes.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::vector<double> y(d);
        std::size_t rem = flat;
        for (std::size_t a = d; a-- > 0;) {
            const std::size_t idx = rem % per_axis;
            rem /= per_axis;
            y[a] = domain.lower()[a] + domain.width(a) * static_cast<double>(idx) / static_cast<double>(grid_n);
        }
        nodes.push_back(std::move(y));
    }
    return nodes;
}

}  // namespace spikebayes
