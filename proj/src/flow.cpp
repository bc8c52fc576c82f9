#include <hkflow/flow.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hkflow {

namespace {

void check_gates(const GeometryCache<double>& cache, const FlowParams& params)
{
    const auto& H = cache.mean_curvature;
    if (params.speed.kind == SpeedFunction::Kind::PowerK && params.k >= 2) {
        require(H.minCoeff() > 0.0, ErrorCode::NotMeanConvex,
            "min H = " + std::to_string(H.minCoeff()) + " under the power-law speed");
    }
    for (Eigen::Index i = 0; i < H.size(); ++i) {
        const double d = params.speed.derivative(H(i));
        require(d > 0.0 && std::isfinite(d), ErrorCode::ParabolicityLost,
            "f'(H) = " + std::to_string(d) + " at vertex " + std::to_string(i));
    }
}

double max_speed_derivative(const GeometryCache<double>& cache, const FlowParams& params)
{
    double m = 0.0;
    for (Eigen::Index i = 0; i < cache.mean_curvature.size(); ++i) {
        m = std::max(m, params.speed.derivative(cache.mean_curvature(i)));
    }
    return m;
}

/// Moves vertices along -f(H) nu, plus the tangential part of an umbrella relaxation.
/// With dt at the stable limit the relaxation moves a vertex by about
/// dt_safety * tangential_smoothing of its tangential offset from the one-ring centroid.
Hypersurface advance(const Hypersurface& mesh, const Topology& topo, const GeometryCache<double>& cache,
    const FlowParams& params, double dt)
{
    using Vec3 = Eigen::RowVector3d;
    Hypersurface next = mesh;
    const double mu = params.tangential_smoothing;
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
        const double H = cache.mean_curvature(i);
        const Vec3 normal = cache.normals.row(i);
        next.vertices.row(i) -= dt * params.speed.value(H) * normal;
        if (mu <= 0.0) continue;
        const auto& ring = topo.one_ring[static_cast<std::size_t>(i)];
        Vec3 centroid = Vec3::Zero();
        double reach_sq = 0.0;
        for (int j : ring) {
            centroid += mesh.vertex(j);
            reach_sq = std::max(reach_sq, (mesh.vertex(j) - mesh.vertex(i)).squaredNorm());
        }
        Vec3 offset = centroid / double(ring.size()) - mesh.vertex(i);
        offset -= offset.dot(normal) * normal;
        const double rate = std::min(mu * dt * params.speed.derivative(H) / reach_sq, 0.5);
        next.vertices.row(i) += rate * offset;
    }
    return next;
}

double clip_to_stop(double dt, double time, const FlowParams& params)
{
    if (params.stop_T) dt = std::min(dt, *params.stop_T - time);
    return dt;
}

StepRecord make_record(std::size_t index, double time, double dt, const Hypersurface& mesh,
    const GeometryCache<double>& cache, int k)
{
    StepRecord r;
    r.step = index;
    r.time = time;
    r.dt = dt;
    r.min_H = cache.mean_curvature.minCoeff();
    r.max_H = cache.mean_curvature.maxCoeff();
    r.max_H_pow = cache.mean_curvature.array().abs().pow(k + 1).maxCoeff();
    r.area = cache.total_area;
    r.min_quality = min_triangle_quality(mesh);
    return r;
}

std::vector<double> curvature_integrals(const GeometryCache<double>& cache, const std::vector<double>& alphas)
{
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double a : alphas) out.push_back(lp_norm_pow(cache, cache.mean_curvature, a));
    return out;
}

/// Tangential part (relative to the cache normals) of the central-difference vertex velocity.
Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> tangential_velocity(
    const Hypersurface& m0, const Hypersurface& m2, const GeometryCache<double>& cache, double span)
{
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> v =
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>::Zero(m0.num_vertices(), 3);
    if (span <= 0.0) return v;
    v = (m2.vertices - m0.vertices) / span;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const Eigen::RowVector3d n = cache.normals.row(i);
        v.row(i) -= v.row(i).dot(n) * n;
    }
    return v;
}

/// Rates of change of the vertex area weights and of a vertex field caused by the
/// tangential velocity alone (reparametrization, no change of the surface).
void tangential_rates(const Hypersurface& mesh, const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>& vt,
    const Eigen::VectorXd& field, Eigen::VectorXd& weight_rate, Eigen::VectorXd& field_rate)
{
    const auto grads = face_gradients(mesh, field);
    const Eigen::VectorXd areas = face_areas(mesh);
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> vertex_grad =
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>::Zero(mesh.num_vertices(), 3);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(mesh.num_vertices());
    weight_rate.setZero(mesh.num_vertices());
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        const Eigen::RowVector3d p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
        const Eigen::RowVector3d n = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
        double area_rate = 0.0;
        for (int a = 0; a < 3; ++a) {
            area_rate += 0.5 * n.cross(p[(a + 2) % 3] - p[(a + 1) % 3]).dot(vt.row(idx[a]));
        }
        for (int a = 0; a < 3; ++a) {
            weight_rate(idx[a]) += area_rate / 3.0;
            vertex_grad.row(idx[a]) += areas(f) * grads.row(f);
            total(idx[a]) += areas(f);
        }
    }
    field_rate.resize(mesh.num_vertices());
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
        field_rate(i) = vertex_grad.row(i).dot(vt.row(i)) / total(i);
    }
}

} // namespace

FlowState make_state(const Hypersurface& mesh, double time)
{
    FlowState s;
    s.time = time;
    s.mesh = mesh;
    s.cache = build_geometry(mesh, GeometryLevel::Full);
    return s;
}

double stable_dt(const Hypersurface& mesh, const GeometryCache<double>& cache, const FlowParams& params)
{
    check_gates(cache, params);
    if (params.fixed_dt) return *params.fixed_dt;
    const double h = min_edge_length(mesh);
    return params.dt_safety * h * h / max_speed_derivative(cache, params);
}

FlowState step(const FlowState& state, const FlowParams& params)
{
    params.validate();
    const Topology topo = build_topology(state.mesh);
    const double dt_raw = stable_dt(state.mesh, state.cache, params);
    require(dt_raw >= params.dt_min, ErrorCode::StepUnderflow,
        "dt = " + std::to_string(dt_raw) + " below dt_min");
    const double dt = clip_to_stop(dt_raw, state.time, params);
    require(dt > 0.0, ErrorCode::InvalidArgument, "state is already at stop_T");

    FlowState next;
    next.mesh = advance(state.mesh, topo, state.cache, params, dt);
    next.time = state.time + dt;
    next.step = state.step + 1;
    next.cache = build_geometry(next.mesh, topo, GeometryLevel::Full);
    return next;
}

FlowTrajectory run(const Hypersurface& mesh0, const FlowParams& params, const std::vector<double>& alphas)
{
    params.validate();
    for (double a : alphas) require(a > 0.0 && std::isfinite(a), ErrorCode::InvalidArgument, "alphas must be positive");
    const Topology topo = build_topology(mesh0);

    FlowTrajectory traj;
    traj.dimension = Hypersurface::dimension;
    traj.k = params.k;
    traj.alphas = alphas;

    Hypersurface mesh = mesh0;
    GeometryCache<double> cache = build_geometry(mesh, topo, GeometryLevel::Full);
    check_gates(cache, params);
    double time = 0.0;
    std::size_t index = 0;

    auto snapshot = [&](StepRecord& record) {
        if (!cache.has_shape_operator) cache = build_geometry(mesh, topo, GeometryLevel::Full);
        record.min_principal = pinching_minimum(cache);
        FlowState s;
        s.time = time;
        s.step = index;
        s.mesh = mesh;
        s.cache = cache;
        traj.states.push_back(std::move(s));
    };

    std::vector<double> integrals = curvature_integrals(cache, alphas);
    {
        StepRecord first = make_record(0, 0.0, 0.0, mesh, cache, params.k);
        first.accumulators.assign(alphas.size(), 0.0);
        snapshot(first);
        traj.steps.push_back(std::move(first));
    }

    const double time_eps = params.stop_T ? 1e-14 * std::max(1.0, *params.stop_T) : 0.0;
    while (true) {
        const StepRecord& last = traj.steps.back();
        if (params.stop_T && time >= *params.stop_T - time_eps) {
            traj.termination = Termination::ReachedT;
            break;
        }
        if (last.max_H_pow > params.blowup_threshold) {
            traj.termination = Termination::BlowupThreshold;
            break;
        }
        if (last.min_quality < params.quality_floor) {
            traj.termination = Termination::QualityFailure;
            break;
        }
        const double dt_raw = stable_dt(mesh, cache, params);
        if (!(dt_raw >= params.dt_min)) {
            traj.termination = Termination::DtUnderflow;
            break;
        }
        double dt = clip_to_stop(dt_raw, time, params);
        mesh = advance(mesh, topo, cache, params, dt);
        cache = build_geometry(mesh, topo, GeometryLevel::Curvature);
        if (params.stop_T && *params.stop_T - (time + dt) <= time_eps) {
            dt = *params.stop_T - time;
            time = *params.stop_T;
        } else {
            time += dt;
        }
        ++index;

        StepRecord record = make_record(index, time, dt, mesh, cache, params.k);
        std::vector<double> next_integrals = curvature_integrals(cache, alphas);
        record.accumulators = last.accumulators;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            record.accumulators[a] += 0.5 * dt * (integrals[a] + next_integrals[a]);
        }
        integrals = std::move(next_integrals);
        if (index % static_cast<std::size_t>(params.snapshot_stride) == 0) snapshot(record);
        traj.steps.push_back(std::move(record));
    }
    if (traj.states.back().step != index) snapshot(traj.steps.back());
    return traj;
}

TmaxEstimate estimate_tmax(const FlowTrajectory& traj, int k)
{
    require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
    std::vector<double> t, y;
    for (const auto& r : traj.steps) {
        if (r.max_H_pow > 0.0 && std::isfinite(r.max_H_pow)) {
            t.push_back(r.time);
            y.push_back(1.0 / r.max_H_pow);
        }
    }
    // Records carry max H^(k_traj+1); convert when a different k is requested.
    if (k != traj.k) {
        for (double& v : y) v = std::pow(v, double(k + 1) / double(traj.k + 1));
    }
    constexpr std::size_t min_samples = 10;
    require(t.size() >= min_samples, ErrorCode::InsufficientSamples,
        std::to_string(t.size()) + " curvature samples, need at least 10");

    const double t_mid = 0.5 * (t.front() + t.back());
    std::size_t begin = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_mid) - t.begin());
    if (t.size() - begin < min_samples) begin = t.size() - min_samples;

    const std::size_t m = t.size() - begin;
    Eigen::VectorXd tt(m), yy(m);
    for (std::size_t i = 0; i < m; ++i) {
        tt(static_cast<Eigen::Index>(i)) = t[begin + i];
        yy(static_cast<Eigen::Index>(i)) = y[begin + i];
    }
    const double t_mean = tt.mean(), y_mean = yy.mean();
    const Eigen::VectorXd dt = tt.array() - t_mean;
    const double sxx = dt.squaredNorm();
    require(sxx > 0.0, ErrorCode::InsufficientSamples, "fit window has no time extent");
    const double slope = dt.dot((yy.array() - y_mean).matrix()) / sxx;
    const double span = tt.maxCoeff() - tt.minCoeff();
    require(slope < 0.0 && -slope * span > 1e-8 * std::abs(y_mean), ErrorCode::InsufficientSamples,
        "max curvature is not growing; no blow-up signal to extrapolate");

    TmaxEstimate e;
    e.slope = slope;
    e.intercept = y_mean - slope * t_mean;
    e.tmax = -e.intercept / slope;
    e.rate = -1.0 / slope;
    e.samples = m;
    e.window_start = tt(0);
    return e;
}

EvolutionResiduals evolution_residuals(const FlowTrajectory& traj, const FlowParams& params)
{
    std::vector<const FlowState*> states;
    for (const auto& s : traj.states) {
        if (s.has_mesh()) states.push_back(&s);
    }
    require(states.size() >= 3, ErrorCode::InsufficientSamples, "need at least 3 snapshots with meshes");
    const double n = traj.dimension;
    const auto& speed = params.speed;

    EvolutionResiduals out;
    for (std::size_t j = 1; j + 1 < states.size(); ++j) {
        const FlowState& s0 = *states[j - 1];
        const FlowState& s1 = *states[j];
        const FlowState& s2 = *states[j + 1];
        const double h1 = s1.time - s0.time, h2 = s2.time - s1.time;
        const auto ddt = [&](const Eigen::VectorXd& y0, const Eigen::VectorXd& y1, const Eigen::VectorXd& y2) -> Eigen::VectorXd {
            if (h1 <= 0.0 || h2 <= 0.0) return Eigen::VectorXd::Zero(y1.size());
            return -h2 / (h1 * (h1 + h2)) * y0 + (h2 - h1) / (h1 * h2) * y1 + h1 / (h2 * (h1 + h2)) * y2;
        };

        const Eigen::VectorXd& H = s1.cache.mean_curvature;
        const Eigen::VectorXd& w = s1.cache.area_weights;
        const Eigen::VectorXd fH = H.unaryExpr([&](double x) { return speed.value(x); });
        const Eigen::VectorXd dfH = H.unaryExpr([&](double x) { return speed.derivative(x); });
        const Eigen::VectorXd ddfH = H.unaryExpr([&](double x) { return speed.second_derivative(x); });

        // Vertices also slide tangentially; remove that transport so only the geometric
        // (normal) evolution is compared with the evolution laws.
        const auto vt = tangential_velocity(s0.mesh, s2.mesh, s1.cache, h1 + h2);
        Eigen::VectorXd w_transport, H_transport;
        tangential_rates(s1.mesh, vt, H, w_transport, H_transport);

        const Eigen::VectorXd dw = ddt(s0.cache.area_weights, w, s2.cache.area_weights) - w_transport;
        const Eigen::VectorXd dw_expected = -(fH.array() * H.array() * w.array()).matrix();
        // Weak form against smooth material test functions; pointwise lumped areas do
        // not converge under refinement, their integrals against smooth weights do.
        double vol = 0.0;
        const Eigen::RowVector3d center = s1.mesh.vertices.colwise().mean();
        const double radius = (s1.mesh.vertices.rowwise() - center).rowwise().norm().maxCoeff();
        for (int j = -1; j < 3; ++j) {
            const Eigen::VectorXd phi = j < 0
                ? Eigen::VectorXd::Ones(w.size())
                : Eigen::VectorXd((0.5 * (s1.mesh.vertices.col(j).array() - center(j)) / radius + 1.0).matrix());
            vol = std::max(vol, std::abs(phi.dot(dw - dw_expected)) / phi.cwiseProduct(dw_expected).lpNorm<1>());
        }

        const Eigen::VectorXd dH = ddt(s0.cache.mean_curvature, H, s2.cache.mean_curvature) - H_transport;
        const Eigen::VectorXd lap = laplace_beltrami(s1.mesh, s1.cache, H);
        const Eigen::VectorXd grad_sq = vertex_gradient_sq(s1.mesh, H);
        const Eigen::VectorXd rhs = (dfH.array() * lap.array() + fH.array() * s1.cache.second_fund_norm_sq.array() +
            ddfH.array() * grad_sq.array()).matrix();
        const double curv = ((dH - rhs).cwiseAbs().dot(w)) / rhs.cwiseAbs().dot(w);

        const Eigen::VectorXd sphere_rhs = (fH.array() * H.array().square() / n).matrix();
        const double sph = ((dH - sphere_rhs).cwiseAbs().dot(w)) / sphere_rhs.cwiseAbs().dot(w);

        out.volume_form_max = std::max(out.volume_form_max, vol);
        out.curvature_max = std::max(out.curvature_max, curv);
        out.sphere_max = std::max(out.sphere_max, sph);
        out.volume_form_mean += vol;
        out.curvature_mean += curv;
        out.sphere_mean += sph;
        ++out.triples;
    }
    const double m = static_cast<double>(out.triples);
    out.volume_form_mean /= m;
    out.curvature_mean /= m;
    out.sphere_mean /= m;
    return out;
}

} // namespace hkflow
