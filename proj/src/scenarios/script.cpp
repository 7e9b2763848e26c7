#include "gdyn/scenarios/script.hpp"

#include "gdyn/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gdyn {

Vec3 AnchorTrajectory::position_at(double t) const
{
    if (keyframes.empty()) return grasp_point;
    if (t <= keyframes.front().time) return keyframes.front().position;
    if (t >= keyframes.back().time) return keyframes.back().position;
    for (size_t k = 1; k < keyframes.size(); ++k) {
        if (t <= keyframes[k].time) {
            const Keyframe& a = keyframes[k - 1];
            const Keyframe& b = keyframes[k];
            const double s = (t - a.time) / (b.time - a.time);
            return (1.0 - s) * a.position + s * b.position;
        }
    }
    return keyframes.back().position;
}

void ScenarioScript::validate() const
{
    for (const AnchorTrajectory& traj : targets) {
        double prev = -std::numeric_limits<double>::infinity();
        for (const Keyframe& k : traj.keyframes) {
            if (!(k.time > prev)) throw InvalidScript("keyframe times must be strictly increasing");
            prev = k.time;
        }
        if (!traj.keyframes.empty() && duration < traj.keyframes.back().time - 1e-12)
            throw InvalidScript("duration must cover the last keyframe");
    }
    if (!(duration > 0)) throw InvalidScript("scenario duration must be positive");
}

namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const nlohmann::json& j)
{
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

} // namespace

std::string ScenarioScript::to_json() const
{
    nlohmann::json j;
    j["name"] = name;
    j["initial_pose"] = {{"translation", vec_json(initial_pose.translation)},
                         {"rotation", nlohmann::json::array({initial_pose.rotation.w(),
                                                             initial_pose.rotation.x(),
                                                             initial_pose.rotation.y(),
                                                             initial_pose.rotation.z()})}};
    j["duration"] = duration;
    j["table_height"] = table_height;
    j["table_enabled"] = table_enabled;
    j["gravity"] = vec_json(gravity);
    nlohmann::json targets_json = nlohmann::json::array();
    for (const AnchorTrajectory& t : targets) {
        nlohmann::json tj;
        tj["grasp_point"] = vec_json(t.grasp_point);
        nlohmann::json kfs = nlohmann::json::array();
        for (const Keyframe& k : t.keyframes)
            kfs.push_back({{"time", k.time}, {"position", vec_json(k.position)}});
        tj["keyframes"] = kfs;
        if (std::isfinite(t.release_time)) tj["release_time"] = t.release_time;
        targets_json.push_back(tj);
    }
    j["targets"] = targets_json;
    return j.dump(2) + "\n";
}

ScenarioScript ScenarioScript::from_json_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScript("bad scenario JSON: " + std::string(e.what()));
    }
    ScenarioScript s;
    try {
        s.name = j.value("name", std::string("scenario"));
        if (j.contains("initial_pose")) {
            const auto& p = j.at("initial_pose");
            s.initial_pose.translation = vec_from(p.at("translation"));
            if (p.contains("rotation")) {
                const auto& q = p.at("rotation");
                s.initial_pose.rotation =
                    Quat(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                         q.at(3).get<double>())
                        .normalized();
            }
        }
        s.duration = j.at("duration").get<double>();
        s.table_height = j.value("table_height", 0.0);
        s.table_enabled = j.value("table_enabled", true);
        if (j.contains("gravity")) s.gravity = vec_from(j.at("gravity"));
        for (const auto& tj : j.value("targets", nlohmann::json::array())) {
            AnchorTrajectory t;
            t.grasp_point = vec_from(tj.at("grasp_point"));
            for (const auto& kj : tj.value("keyframes", nlohmann::json::array()))
                t.keyframes.push_back({kj.at("time").get<double>(), vec_from(kj.at("position"))});
            if (tj.contains("release_time")) t.release_time = tj.at("release_time").get<double>();
            s.targets.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScript("bad scenario JSON: " + std::string(e.what()));
    }
    s.validate();
    return s;
}

ScenarioScript ScenarioScript::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidScript("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void ScenarioScript::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw InvalidScript("cannot write scenario file: " + path);
    out << to_json();
}

int select_grasp_vertex(const std::vector<Vec3>& positions, const Vec3& gripper)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < positions.size(); ++v) {
        const double d = (positions[v] - gripper).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(v);
        }
    }
    return best;
}

namespace {

std::vector<Vec3> posed_positions(const TriangleMesh& mesh, const RigidTransform& pose)
{
    std::vector<Vec3> out(mesh.positions.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = pose.apply(mesh.positions[i]);
    return out;
}

/// Default grasp points: corners of the bounding rectangle nearest the robot
/// (minimum x), at both y extremes.
std::vector<Vec3> default_grasp_points(const std::vector<Vec3>& pos)
{
    Vec3 lo = pos[0], hi = pos[0];
    for (const Vec3& p : pos) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec3 c0(lo.x(), lo.y(), lo.z());
    const Vec3 c1(lo.x(), hi.y(), lo.z());
    return {pos[select_grasp_vertex(pos, c0)], pos[select_grasp_vertex(pos, c1)]};
}

void check_in_bounds(const std::vector<Vec3>& pos, const std::vector<Vec3>& points)
{
    Vec3 lo = pos[0], hi = pos[0];
    for (const Vec3& p : pos) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double margin = 0.1 * (hi - lo).norm() + 1e-9;
    for (const Vec3& p : points)
        if ((p.array() < lo.array() - margin).any() || (p.array() > hi.array() + margin).any())
            throw InvalidScript("grasp point outside the mesh bounds");
}

} // namespace

ScenarioScript make_grasp(const TriangleMesh& mesh, const RigidTransform& pose,
                          const GraspParams& params, std::vector<Vec3> grasp_points)
{
    const std::vector<Vec3> pos = posed_positions(mesh, pose);
    if (grasp_points.empty()) grasp_points = default_grasp_points(pos);
    check_in_bounds(pos, grasp_points);

    ScenarioScript s;
    s.name = "grasp";
    s.initial_pose = pose;
    for (const Vec3& gp : grasp_points) {
        AnchorTrajectory t;
        t.grasp_point = gp;
        const Vec3 start = pos[select_grasp_vertex(pos, gp)];
        t.keyframes.push_back({0.0, start});
        t.keyframes.push_back({params.lift_time, start + Vec3(0, 0, params.height)});
        s.targets.push_back(std::move(t));
    }
    s.duration = params.lift_time + params.settle_time;
    s.validate();
    return s;
}

ScenarioScript make_fling(const TriangleMesh& mesh, const RigidTransform& pose,
                          const FlingParams& params, std::vector<Vec3> grasp_points)
{
    const std::vector<Vec3> pos = posed_positions(mesh, pose);
    if (grasp_points.empty()) grasp_points = default_grasp_points(pos);
    check_in_bounds(pos, grasp_points);

    ScenarioScript s;
    s.name = "fling";
    s.initial_pose = pose;
    const double half_stroke = 0.5 * params.stroke_time;
    for (const Vec3& gp : grasp_points) {
        AnchorTrajectory t;
        t.grasp_point = gp;
        const Vec3 start = pos[select_grasp_vertex(pos, gp)];
        const Vec3 up = start + Vec3(0, 0, params.lift_height);
        t.keyframes.push_back({0.0, start});
        t.keyframes.push_back({params.lift_time, up});
        t.keyframes.push_back({params.lift_time + half_stroke, up + Vec3(params.stroke, 0, 0)});
        t.keyframes.push_back({params.lift_time + params.stroke_time, up});
        s.targets.push_back(std::move(t));
    }
    s.duration = params.lift_time + params.stroke_time + params.settle_time;
    s.validate();
    return s;
}

ScenarioScript make_fold(const TriangleMesh& mesh, const RigidTransform& pose,
                         const FoldParams& params, std::vector<Vec3> grasp_points)
{
    const std::vector<Vec3> pos = posed_positions(mesh, pose);
    if (grasp_points.empty()) grasp_points = default_grasp_points(pos);
    check_in_bounds(pos, grasp_points);

    Vec3 lo = pos[0], hi = pos[0];
    for (const Vec3& p : pos) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }

    ScenarioScript s;
    s.name = "fold";
    s.initial_pose = pose;
    const double t_lift = params.lift_time;
    const double t_place = params.lift_time + params.travel_time;
    for (const Vec3& gp : grasp_points) {
        AnchorTrajectory t;
        t.grasp_point = gp;
        const Vec3 start = pos[select_grasp_vertex(pos, gp)];
        // carry the near edge over to the far (bottom) edge x position
        const Vec3 land(hi.x(), start.y(), start.z() + 0.2 * params.lift_height);
        t.keyframes.push_back({0.0, start});
        t.keyframes.push_back({t_lift, start + Vec3(0, 0, params.lift_height)});
        t.keyframes.push_back({t_place, land + Vec3(0, 0, 0.8 * params.lift_height)});
        t.keyframes.push_back({t_place + 0.2, land});
        t.release_time = t_place + 0.2;
        s.targets.push_back(std::move(t));
    }
    s.duration = t_place + 0.2 + params.settle_time;
    s.validate();
    return s;
}

} // namespace gdyn
