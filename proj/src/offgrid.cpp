#include "qnomp/offgrid.hpp"

#include <cmath>

#include "qnomp/core.hpp"
#include "qnomp/ongrid.hpp"

namespace qnomp {

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrackRho = 0.5;
constexpr double kAlpha0 = 1.0;
constexpr int kMaxBacktracks = 30;

double sigma2_floor(const Observation& obs, const ChannelConfig& cfg) {
    const double floor = 1e-12 * obs.h_prime.squaredNorm() / static_cast<double>(cfg.dim());
    return std::max(obs.sigma2, floor);
}

void check_regularizer(const Regularizer& reg, Eigen::Index k) {
    if (reg.E_diag.size() > 0) {
        if (reg.E_diag.size() != k) throw std::invalid_argument("Regularizer: E_diag length != path count");
        if ((reg.E_diag.array() <= 0.0).any()) throw std::invalid_argument("Regularizer: entries must be > 0");
    } else if (!(reg.lambda > 0.0)) {
        throw std::invalid_argument("Regularizer: lambda must be > 0");
    }
}

struct ProfileEval {
    double loss = 0.0;
    Vec g_tau, g_theta;
    CVec beta;
};

ProfileEval eval_profile(const Vec& taus, const Vec& thetas, const Observation& obs, const ChannelConfig& cfg,
                         const Regularizer* reg, bool with_grad) {
    if (taus.size() != thetas.size()) throw std::invalid_argument("profiled loss: parameter length mismatch");
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("profiled loss: observation length != N*M");
    const double s2 = sigma2_floor(obs, cfg);
    const Eigen::Index k = taus.size();

    ProfileEval out;
    if (k == 0) {
        out.loss = obs.h_prime.squaredNorm() / s2;
        return out;
    }

    PathSet params;
    params.taus = taus;
    params.thetas = thetas;
    params.betas = CVec::Zero(k);
    const Dictionary dict = build_dictionary(params, cfg);

    if (reg) {
        check_regularizer(*reg, k);
        CMat G = dict.atoms.adjoint() * dict.atoms;
        for (Eigen::Index i = 0; i < k; ++i) G(i, i) += s2 / reg->prior(i);
        out.beta = G.ldlt().solve(dict.atoms.adjoint() * obs.h_prime);
    } else {
        out.beta = ls_gains(dict, obs.h_prime);
    }

    const CVec err = dict.atoms * out.beta - obs.h_prime;  // A beta - h'
    out.loss = err.squaredNorm() / s2;
    if (reg) {
        double penalty = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) penalty += std::norm(out.beta[i]) / reg->prior(i);
        out.loss += penalty;
    }

    if (with_grad) {
        out.g_tau.resize(k);
        out.g_theta.resize(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const cxd dot_tau = build_atom_dtau(taus[i], thetas[i], cfg).dot(err);
            const cxd dot_theta = build_atom_dtheta(taus[i], thetas[i], cfg).dot(err);
            out.g_tau[i] = 2.0 / s2 * (std::conj(out.beta[i]) * dot_tau).real();
            out.g_theta[i] = 2.0 / s2 * (std::conj(out.beta[i]) * dot_theta).real();
        }
    }
    return out;
}

// One inverse-BFGS block update: H <- H + (1 + y'Hy/sy) ss'/sy - (s y'H + H y s')/sy.
// Returns false when the curvature test fails and the update is skipped.
bool update_block(Mat& H, const Vec& s, const Vec& y, bool& fresh, bool scale_first) {
    const double sy = s.dot(y);
    if (sy <= 1e-10 * s.norm() * y.norm()) return false;
    if (fresh && scale_first) {
        // Rescale the initial identity to the secant magnitude before the
        // first update; makes H a usable curvature estimate from the start.
        const double yy = y.squaredNorm();
        if (yy > 0.0) H = (sy / yy) * Mat::Identity(H.rows(), H.cols());
    }
    fresh = false;
    const Vec Hy = H * y;
    const double yHy = y.dot(Hy);
    H += ((1.0 + yHy / sy) / sy) * (s * s.transpose());
    H -= (s * Hy.transpose() + Hy * s.transpose()) / sy;
    return true;
}

}  // namespace

double loss_profile(const Vec& taus, const Vec& thetas, const Observation& obs, const ChannelConfig& cfg,
                    const std::optional<Regularizer>& reg) {
    return eval_profile(taus, thetas, obs, cfg, reg ? &*reg : nullptr, false).loss;
}

std::pair<Vec, Vec> grad_profile(const Vec& taus, const Vec& thetas, const Observation& obs,
                                 const ChannelConfig& cfg, const std::optional<Regularizer>& reg) {
    ProfileEval e = eval_profile(taus, thetas, obs, cfg, reg ? &*reg : nullptr, true);
    return {std::move(e.g_tau), std::move(e.g_theta)};
}

namespace {

// Search returning the accepted loss as well, so the driver does not have to
// re-evaluate at the accepted point.
std::pair<double, double> armijo_search(const Vec& d_tau, const Vec& d_theta, const BfgsState& state,
                                        const LossFn& loss_fn) {
    const double gd = state.grad_tau.dot(d_tau) + state.grad_theta.dot(d_theta);
    if (!(gd < 0.0)) throw std::invalid_argument("armijo_step: direction is not a descent direction");
    double alpha = kAlpha0;
    for (int m = 0; m <= kMaxBacktracks; ++m) {
        const double trial = loss_fn(state.taus + alpha * d_tau, state.thetas + alpha * d_theta);
        if (trial <= state.loss + kArmijoC1 * alpha * gd) return {alpha, trial};
        alpha *= kBacktrackRho;
    }
    return {0.0, state.loss};
}

}  // namespace

double armijo_step(const Vec& direction_tau, const Vec& direction_theta, const BfgsState& state,
                   const LossFn& loss_fn) {
    return armijo_search(direction_tau, direction_theta, state, loss_fn).first;
}

BfgsState bfgs_update(BfgsState state, const Vec& new_grad_tau, const Vec& new_grad_theta) {
    if (state.joint_blocks) {
        const Eigen::Index k = state.taus.size();
        Vec s(2 * k), y(2 * k);
        s << state.taus - state.prev_taus, state.thetas - state.prev_thetas;
        y << new_grad_tau - state.prev_grad_tau, new_grad_theta - state.prev_grad_theta;
        if (!update_block(state.H_tau, s, y, state.h_fresh_tau, state.scale_first_update))
            ++state.curvature_skips;
    } else {
        const Vec s_tau = state.taus - state.prev_taus;
        const Vec y_tau = new_grad_tau - state.prev_grad_tau;
        if (!update_block(state.H_tau, s_tau, y_tau, state.h_fresh_tau, state.scale_first_update))
            ++state.curvature_skips;
        const Vec s_theta = state.thetas - state.prev_thetas;
        const Vec y_theta = new_grad_theta - state.prev_grad_theta;
        if (!update_block(state.H_theta, s_theta, y_theta, state.h_fresh_theta, state.scale_first_update))
            ++state.curvature_skips;
    }
    state.grad_tau = new_grad_tau;
    state.grad_theta = new_grad_theta;
    return state;
}

RefineOutcome refine_offgrid(const Vec& initial_taus, const Vec& initial_thetas, const Observation& obs,
                             const ChannelConfig& cfg, int n_in, const std::optional<Regularizer>& reg,
                             const RefineOptions& options) {
    if (initial_taus.size() == 0) throw std::invalid_argument("refine_offgrid: empty parameter set");
    if (initial_taus.size() != initial_thetas.size())
        throw std::invalid_argument("refine_offgrid: parameter length mismatch");
    const Eigen::Index k = initial_taus.size();
    const double dt = cfg.delay_step();
    const double da = cfg.angle_step();
    const Regularizer* regp = reg ? &*reg : nullptr;

    BfgsState st;
    st.delay_step = dt;
    st.angle_step = da;
    st.taus = initial_taus / dt;
    st.thetas = initial_thetas / da;
    st.joint_blocks = options.joint_blocks;
    st.scale_first_update = options.scale_first_update;
    if (options.joint_blocks) {
        st.H_tau = Mat::Identity(2 * k, 2 * k);
        st.H_theta.resize(0, 0);
    } else {
        st.H_tau = Mat::Identity(k, k);
        st.H_theta = Mat::Identity(k, k);
    }

    // Loss and gradient in normalized units: chain rule multiplies the
    // natural gradients by the respective steps.
    const auto eval = [&](const Vec& ts, const Vec& th, bool with_grad) {
        ProfileEval e = eval_profile(ts * dt, th * da, obs, cfg, regp, with_grad);
        if (with_grad) {
            e.g_tau *= dt;
            e.g_theta *= da;
        }
        return e;
    };
    const LossFn loss_fn = [&](const Vec& ts, const Vec& th) { return eval(ts, th, false).loss; };

    ProfileEval cur = eval(st.taus, st.thetas, true);
    st.loss = cur.loss;
    st.grad_tau = cur.g_tau;
    st.grad_theta = cur.g_theta;

    for (int it = 0; it < n_in; ++it) {
        const double gnorm = std::sqrt(st.grad_tau.squaredNorm() + st.grad_theta.squaredNorm());
        if (options.grad_tol > 0.0 && gnorm < options.grad_tol) break;

        Vec d_tau, d_theta;
        const auto directions = [&]() {
            if (st.joint_blocks) {
                Vec g(2 * k);
                g << st.grad_tau, st.grad_theta;
                const Vec d = -(st.H_tau * g);
                d_tau = d.head(k);
                d_theta = d.tail(k);
            } else {
                d_tau = -(st.H_tau * st.grad_tau);
                d_theta = -(st.H_theta * st.grad_theta);
            }
        };
        directions();
        double gd = st.grad_tau.dot(d_tau) + st.grad_theta.dot(d_theta);
        if (!(gd < 0.0)) {
            // Nonconvex territory can corrupt H; reset to identity and retry
            // once with the plain gradient direction.
            ++st.hessian_resets;
            if (st.joint_blocks) {
                st.H_tau.setIdentity();
            } else {
                st.H_tau.setIdentity();
                st.H_theta.setIdentity();
            }
            st.h_fresh_tau = st.h_fresh_theta = true;
            directions();
            gd = st.grad_tau.dot(d_tau) + st.grad_theta.dot(d_theta);
            if (!(gd < 0.0)) break;  // zero gradient: converged
        }

        // Until the first accepted step calibrates H (Shanno rescale), the
        // raw gradient sets the direction length. The 1/sigma^2 factor in the
        // loss can push it far beyond what thirty halvings from alpha_0 = 1
        // can bridge, so cap the first trial step at one normalized unit --
        // the classical alpha_0 = 1/||g_0|| rule folded into the direction.
        if (st.iterations == 0) {
            const double dn = std::sqrt(d_tau.squaredNorm() + d_theta.squaredNorm());
            if (dn > 1.0) {
                d_tau /= dn;
                d_theta /= dn;
            }
        }

        const auto [alpha, new_loss] = armijo_search(d_tau, d_theta, st, loss_fn);
        if (alpha == 0.0) {
            st.stalled = true;
            break;
        }

        st.prev_taus = st.taus;
        st.prev_thetas = st.thetas;
        st.prev_grad_tau = st.grad_tau;
        st.prev_grad_theta = st.grad_theta;
        st.taus += alpha * d_tau;
        st.thetas += alpha * d_theta;
        st.loss = new_loss;
        ++st.iterations;

        const ProfileEval nxt = eval(st.taus, st.thetas, true);
        st = bfgs_update(std::move(st), nxt.g_tau, nxt.g_theta);
    }

    RefineOutcome out;
    out.taus = st.taus * dt;
    out.thetas = st.thetas * da;
    out.state = std::move(st);
    return out;
}

CVec regularized_gains(const Dictionary& dictionary, const Observation& obs, const Regularizer& reg) {
    const CMat& A = dictionary.atoms;
    if (A.rows() != obs.h_prime.size()) throw std::invalid_argument("regularized_gains: shape mismatch");
    const Eigen::Index k = A.cols();
    check_regularizer(reg, k);
    CMat G = A.adjoint() * A;
    for (Eigen::Index i = 0; i < k; ++i) G(i, i) += obs.sigma2 / reg.prior(i);
    return G.ldlt().solve(A.adjoint() * obs.h_prime);
}

}  // namespace qnomp
