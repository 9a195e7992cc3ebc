#include "cfc/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "cfc/error.hpp"

namespace cfc {

void GeometryConfig::validate() const {
  if (n_d <= 0 || n_d % 2 != 0) throw InvalidArgument("n_d must be a positive even integer");
  if (!(contact_margin > 0.0)) throw InvalidArgument("contact_margin must be positive");
  if (max_contacts_per_pair <= 0) throw InvalidArgument("max_contacts_per_pair must be positive");
}

Posed PlacedShape::world_pose() const {
  Posed w;
  w.position = body_pose.transform(shape.local.position);
  w.orientation = body_pose.orientation * shape.local.orientation;
  return w;
}

double FrictionTable::lookup(int a, int b) const {
  for (const Entry& e : overrides) {
    if ((e.body_a == a && e.body_b == b) || (e.body_a == b && e.body_b == a)) return e.mu;
  }
  return default_mu;
}

SceneSnapshot make_snapshot(const SystemLayout& layout, const VectorXd& q,
                            const FrictionTable& friction) {
  SceneSnapshot snap;
  snap.friction = friction;
  snap.shapes.reserve(layout.num_bodies());
  for (int id = 0; id < layout.num_bodies(); ++id) {
    snap.shapes.push_back(
        PlacedShape{id, layout.body(id).shape, layout.pose(id, q), layout.has_dofs(id)});
  }
  return snap;
}

std::vector<Vector3d> tangent_basis(const Vector3d& normal, int n_d) {
  if (n_d <= 0 || n_d % 2 != 0) throw InvalidArgument("n_d must be a positive even integer");
  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(normal(k)) < std::abs(normal(axis))) axis = k;
  }
  const Vector3d e = Vector3d::Unit(axis);
  const Vector3d t1 = (e - normal.dot(e) * normal).normalized();
  const Vector3d t2 = normal.cross(t1).normalized();
  std::vector<Vector3d> dirs(n_d);
  const int half = n_d / 2;
  for (int k = 0; k < half; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_d;
    dirs[k] = (std::cos(angle) * t1 + std::sin(angle) * t2).normalized();
    dirs[k + half] = -dirs[k];
  }
  return dirs;
}

double box_sdf(const Vector3d& half_extents, const Vector3d& p, Vector3d* gradient) {
  const Vector3d q = p.cwiseAbs() - half_extents;
  const Vector3d sign = p.unaryExpr([](double x) { return x < 0.0 ? -1.0 : 1.0; });
  if ((q.array() > 0.0).any()) {
    const Vector3d outside = q.cwiseMax(0.0);
    const double dist = outside.norm();
    if (gradient) *gradient = sign.cwiseProduct(outside) / dist;
    return dist;
  }
  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (q(k) > q(axis)) axis = k;
  }
  if (gradient) *gradient = sign(axis) * Vector3d::Unit(axis);
  return q(axis);
}

namespace {

ContactPoint make_contact(int a, int b, const Vector3d& witness, const Vector3d& normal,
                          double phi) {
  ContactPoint c;
  c.body_a = a;
  c.body_b = b;
  c.witness_point = witness;
  c.normal = normal.normalized();
  c.phi = phi;
  return c;
}

ContactPoint flipped(ContactPoint c) {
  std::swap(c.body_a, c.body_b);
  c.normal = -c.normal;
  return c;
}

std::vector<ContactPoint> flipped(std::vector<ContactPoint> cs) {
  for (ContactPoint& c : cs) c = flipped(std::move(c));
  return cs;
}

std::array<Vector3d, 8> box_vertices(const Vector3d& h) {
  std::array<Vector3d, 8> v;
  for (int i = 0; i < 8; ++i) {
    v[i] = Vector3d((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  return v;
}

std::vector<Vector3d> box_samples(const Vector3d& h) {
  std::vector<Vector3d> s;
  for (const Vector3d& v : box_vertices(h)) s.push_back(v);
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      Vector3d c = Vector3d::Zero();
      c(axis) = sign * h(axis);
      s.push_back(c);
    }
  }
  return s;
}

bool witness_less(const ContactPoint& x, const ContactPoint& y) {
  const Vector3d& p = x.witness_point;
  const Vector3d& r = y.witness_point;
  return std::tie(p.x(), p.y(), p.z()) < std::tie(r.x(), r.y(), r.z());
}

// Keeps the `cap` deepest candidates, then orders them by witness point.
std::vector<ContactPoint> keep_deepest(std::vector<ContactPoint> cs, int cap) {
  std::stable_sort(cs.begin(), cs.end(), [](const ContactPoint& x, const ContactPoint& y) {
    if (x.phi != y.phi) return x.phi < y.phi;
    return witness_less(x, y);
  });
  if (static_cast<int>(cs.size()) > cap) cs.resize(cap);
  std::sort(cs.begin(), cs.end(), witness_less);
  return cs;
}

std::vector<ContactPoint> sphere_plane(const PlacedShape& sphere, const PlacedShape& plane,
                                       const GeometryConfig& cfg) {
  const Posed ps = sphere.world_pose();
  const Posed pp = plane.world_pose();
  const Vector3d n = pp.orientation * Vector3d::UnitZ();
  const double height = n.dot(ps.position - pp.position);
  const double phi = height - sphere.shape.radius;
  if (phi > cfg.contact_margin) return {};
  const Vector3d on_sphere = ps.position - sphere.shape.radius * n;
  const Vector3d on_plane = ps.position - height * n;
  return {make_contact(sphere.body_id, plane.body_id, 0.5 * (on_sphere + on_plane), n, phi)};
}

std::vector<ContactPoint> sphere_sphere(const PlacedShape& a, const PlacedShape& b,
                                        const GeometryConfig& cfg) {
  const Posed pa = a.world_pose();
  const Posed pb = b.world_pose();
  const Vector3d d = pa.position - pb.position;
  const double dist = d.norm();
  const double phi = dist - a.shape.radius - b.shape.radius;
  if (phi > cfg.contact_margin) return {};
  const Vector3d n = dist > 0.0 ? Vector3d(d / dist) : Vector3d::UnitZ();
  const Vector3d on_a = pa.position - a.shape.radius * n;
  const Vector3d on_b = pb.position + b.shape.radius * n;
  return {make_contact(a.body_id, b.body_id, 0.5 * (on_a + on_b), n, phi)};
}

std::vector<ContactPoint> sphere_box(const PlacedShape& sphere, const PlacedShape& box,
                                     const GeometryConfig& cfg) {
  const Posed ps = sphere.world_pose();
  const Posed pb = box.world_pose();
  Vector3d grad_local;
  const double sdf = box_sdf(box.shape.half_extents, pb.inverse_transform(ps.position), &grad_local);
  const double phi = sdf - sphere.shape.radius;
  if (phi > cfg.contact_margin) return {};
  const Vector3d n = pb.orientation * grad_local;
  const Vector3d on_sphere = ps.position - sphere.shape.radius * n;
  const Vector3d on_box = ps.position - sdf * n;
  return {make_contact(sphere.body_id, box.body_id, 0.5 * (on_sphere + on_box), n, phi)};
}

std::vector<ContactPoint> box_plane(const PlacedShape& box, const PlacedShape& plane,
                                    const GeometryConfig& cfg) {
  const Posed pb = box.world_pose();
  const Posed pp = plane.world_pose();
  const Vector3d n = pp.orientation * Vector3d::UnitZ();
  std::vector<ContactPoint> cs;
  for (const Vector3d& v : box_vertices(box.shape.half_extents)) {
    const Vector3d w = pb.transform(v);
    const double phi = n.dot(w - pp.position);
    if (phi > cfg.contact_margin) continue;
    cs.push_back(make_contact(box.body_id, plane.body_id, w - 0.5 * phi * n, n, phi));
  }
  return keep_deepest(std::move(cs), cfg.max_contacts_per_pair);
}

// Surface samples of `from` evaluated against the signed distance of `into`.
// Normals point from `into` toward `from`.
void box_samples_into(const PlacedShape& from, const PlacedShape& into, const GeometryConfig& cfg,
                      std::vector<ContactPoint>& out, bool from_is_a) {
  const Posed pf = from.world_pose();
  const Posed pi = into.world_pose();
  for (const Vector3d& s : box_samples(from.shape.half_extents)) {
    const Vector3d w = pf.transform(s);
    Vector3d grad_local;
    const double phi = box_sdf(into.shape.half_extents, pi.inverse_transform(w), &grad_local);
    if (phi > cfg.contact_margin) continue;
    const Vector3d n = pi.orientation * grad_local;
    const Vector3d witness = w - 0.5 * phi * n;
    if (from_is_a) {
      out.push_back(make_contact(from.body_id, into.body_id, witness, n, phi));
    } else {
      out.push_back(make_contact(into.body_id, from.body_id, witness, -n, phi));
    }
  }
}

std::vector<ContactPoint> box_box(const PlacedShape& a, const PlacedShape& b,
                                  const GeometryConfig& cfg) {
  std::vector<ContactPoint> cs;
  box_samples_into(a, b, cfg, cs, true);
  box_samples_into(b, a, cfg, cs, false);
  return keep_deepest(std::move(cs), cfg.max_contacts_per_pair);
}

}  // namespace

std::vector<ContactPoint> detect_pair(const PlacedShape& a, const PlacedShape& b,
                                      const GeometryConfig& cfg) {
  const ShapeKind ka = a.shape.kind;
  const ShapeKind kb = b.shape.kind;
  using K = ShapeKind;
  if (ka == K::kSphere && kb == K::kPlane) return sphere_plane(a, b, cfg);
  if (ka == K::kPlane && kb == K::kSphere) return flipped(sphere_plane(b, a, cfg));
  if (ka == K::kSphere && kb == K::kSphere) return sphere_sphere(a, b, cfg);
  if (ka == K::kSphere && kb == K::kBox) return sphere_box(a, b, cfg);
  if (ka == K::kBox && kb == K::kSphere) return flipped(sphere_box(b, a, cfg));
  if (ka == K::kBox && kb == K::kPlane) return box_plane(a, b, cfg);
  if (ka == K::kPlane && kb == K::kBox) return flipped(box_plane(b, a, cfg));
  if (ka == K::kBox && kb == K::kBox) return box_box(a, b, cfg);
  throw UnsupportedGeometry(std::string("unsupported shape pair: ") + shape_name(ka) + "-" +
                            shape_name(kb) + " (bodies " + std::to_string(a.body_id) + ", " +
                            std::to_string(b.body_id) + ")");
}

std::vector<ContactPoint> detect_contacts(const SceneSnapshot& scene, const GeometryConfig& cfg) {
  cfg.validate();
  std::vector<ContactPoint> out;
  const int n = static_cast<int>(scene.shapes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const PlacedShape& lo = scene.shapes[i];
      const PlacedShape& hi = scene.shapes[j];
      if (!lo.movable && !hi.movable) continue;
      auto pair = detect_pair(hi, lo, cfg);
      for (ContactPoint& c : pair) {
        c.tangent_dirs = tangent_basis(c.normal, cfg.n_d);
        c.friction_mu = scene.friction.lookup(c.body_a, c.body_b);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

}  // namespace cfc
