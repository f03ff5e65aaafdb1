// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace polymg
{

BoundingBox BoundingBox::Empty(int dim)
{
  BoundingBox b;
  b.dim = dim;
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; i++)
  {
    b.lo[i] = i < dim ? inf : 0.0;
    b.hi[i] = i < dim ? -inf : 0.0;
  }
  return b;
}

void BoundingBox::Expand(const BoundingBox &other)
{
  for (int i = 0; i < dim; i++)
  {
    lo[i] = std::min(lo[i], other.lo[i]);
    hi[i] = std::max(hi[i], other.hi[i]);
  }
}

void BoundingBox::Expand(const Point &p)
{
  for (int i = 0; i < dim; i++)
  {
    lo[i] = std::min(lo[i], p[i]);
    hi[i] = std::max(hi[i], p[i]);
  }
}

bool BoundingBox::Contains(const BoundingBox &other, double tol) const
{
  for (int i = 0; i < dim; i++)
  {
    if (other.lo[i] < lo[i] - tol || other.hi[i] > hi[i] + tol)
    {
      return false;
    }
  }
  return true;
}

bool BoundingBox::Contains(const Point &p, double tol) const
{
  for (int i = 0; i < dim; i++)
  {
    if (p[i] < lo[i] - tol || p[i] > hi[i] + tol)
    {
      return false;
    }
  }
  return true;
}

double BoundingBox::Volume() const
{
  double v = 1.0;
  for (int i = 0; i < dim; i++)
  {
    v *= std::max(hi[i] - lo[i], 0.0);
  }
  return v;
}

double BoundingBox::Margin() const
{
  double m = 0.0;
  for (int i = 0; i < dim; i++)
  {
    m += hi[i] - lo[i];
  }
  return m;
}

double BoundingBox::OverlapVolume(const BoundingBox &other) const
{
  double v = 1.0;
  for (int i = 0; i < dim; i++)
  {
    const double w = std::min(hi[i], other.hi[i]) - std::max(lo[i], other.lo[i]);
    if (w <= 0.0)
    {
      return 0.0;
    }
    v *= w;
  }
  return v;
}

Point BoundingBox::Center() const
{
  Point c{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; i++)
  {
    c[i] = 0.5 * (lo[i] + hi[i]);
  }
  return c;
}

BoundingBox Union(const BoundingBox &a, const BoundingBox &b)
{
  BoundingBox u = a;
  u.Expand(b);
  return u;
}

std::vector<int> LocalFaceCorners(int dim, int local_face)
{
  const int dir = local_face / 2, side = local_face % 2;
  std::vector<int> c;
  for (int corner = 0; corner < (1 << dim); corner++)
  {
    if (((corner >> dir) & 1) == side)
    {
      c.push_back(corner);
    }
  }
  return c;
}

namespace
{

struct FaceKey
{
  std::array<Index, 4> v;
  bool operator==(const FaceKey &o) const { return v == o.v; }
};

struct FaceKeyHash
{
  std::size_t operator()(const FaceKey &k) const
  {
    std::size_t h = 1469598103934665603ull;
    for (Index i : k.v)
    {
      h ^= static_cast<std::size_t>(i) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

double ShapeValue(int dim, int corner, const Point &xi)
{
  double v = 1.0;
  for (int d = 0; d < dim; d++)
  {
    v *= ((corner >> d) & 1) ? xi[d] : 1.0 - xi[d];
  }
  return v;
}

double ShapeDerivative(int dim, int corner, int j, const Point &xi)
{
  double v = 1.0;
  for (int d = 0; d < dim; d++)
  {
    const bool one = (corner >> d) & 1;
    if (d == j)
    {
      v *= one ? 1.0 : -1.0;
    }
    else
    {
      v *= one ? xi[d] : 1.0 - xi[d];
    }
  }
  return v;
}

// 3-point Gauss-Legendre rule on [0, 1].
constexpr std::array<double, 3> kG3x = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr std::array<double, 3> kG3w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double Determinant(int dim, const Tensor &J)
{
  if (dim == 2)
  {
    return J[0][0] * J[1][1] - J[0][1] * J[1][0];
  }
  return J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
         J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
         J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
}

}  // namespace

Mesh::Mesh(int dim_, std::vector<Point> vertices_, std::vector<Index> element_corners)
  : dim(dim_), vertices(std::move(vertices_)), corners(std::move(element_corners))
{
  if (dim != 2 && dim != 3)
  {
    throw std::invalid_argument("Mesh dimension must be 2 or 3");
  }
  const int nc = CornersPerElement();
  if (corners.size() % nc != 0)
  {
    throw std::invalid_argument("Element connectivity size is not a multiple of 2^dim");
  }
  num_elements = static_cast<Index>(corners.size() / nc);
  for (Index v : corners)
  {
    if (v < 0 || v >= NumVertices())
    {
      throw std::invalid_argument("Element references a nonexistent vertex");
    }
  }
  for (auto &p : vertices)
  {
    for (int i = dim; i < 3; i++)
    {
      p[i] = 0.0;
    }
  }

  is_box.assign(num_elements, 0);
  all_boxes = true;
  for (Index k = 0; k < num_elements; k++)
  {
    const Point &x0 = Corner(k, 0);
    Point h{0.0, 0.0, 0.0};
    double scale = 0.0;
    for (int d = 0; d < dim; d++)
    {
      h[d] = Corner(k, 1 << d)[d] - x0[d];
      scale = std::max(scale, std::abs(h[d]));
    }
    bool box = true;
    for (int d = 0; d < dim; d++)
    {
      box = box && h[d] > 0.0;
    }
    const double tol = 1e-12 * scale;
    for (int c = 0; c < nc && box; c++)
    {
      const Point &xc = Corner(k, c);
      for (int d = 0; d < dim; d++)
      {
        const double expect = x0[d] + (((c >> d) & 1) ? h[d] : 0.0);
        if (std::abs(xc[d] - expect) > tol)
        {
          box = false;
        }
      }
    }
    is_box[k] = box ? 1 : 0;
    all_boxes = all_boxes && box;
    if (ElementMeasure(k) <= 0.0)
    {
      throw std::invalid_argument("Element " + std::to_string(k) +
                                  " has nonpositive measure (check corner order)");
    }
  }
  BuildFaces();
}

Mesh Mesh::Structured(int dim, const Point &lo, const Point &hi,
                      const std::array<int, 3> &subdivisions)
{
  if (dim != 2 && dim != 3)
  {
    throw std::invalid_argument("Mesh dimension must be 2 or 3");
  }
  std::array<int, 3> n{1, 1, 1};
  for (int d = 0; d < dim; d++)
  {
    if (subdivisions[d] < 1)
    {
      throw std::invalid_argument("Subdivisions must be positive on every axis");
    }
    if (!(hi[d] > lo[d]))
    {
      throw std::invalid_argument("Box upper corner must exceed lower corner");
    }
    n[d] = subdivisions[d];
  }
  auto coord = [&](int d, int i)
  { return i == n[d] ? hi[d] : lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / n[d]; };

  const int nz_v = dim == 3 ? n[2] + 1 : 1;
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(n[0] + 1) * (n[1] + 1) * nz_v);
  for (int k = 0; k < nz_v; k++)
  {
    for (int j = 0; j <= n[1]; j++)
    {
      for (int i = 0; i <= n[0]; i++)
      {
        verts.push_back({coord(0, i), coord(1, j), dim == 3 ? coord(2, k) : 0.0});
      }
    }
  }
  auto vid = [&](int i, int j, int k)
  { return static_cast<Index>(i + (n[0] + 1) * (j + (n[1] + 1) * k)); };

  const int nz = dim == 3 ? n[2] : 1;
  std::vector<Index> conn;
  conn.reserve(static_cast<std::size_t>(n[0]) * n[1] * nz * (1 << dim));
  for (int k = 0; k < nz; k++)
  {
    for (int j = 0; j < n[1]; j++)
    {
      for (int i = 0; i < n[0]; i++)
      {
        for (int c = 0; c < (1 << dim); c++)
        {
          conn.push_back(vid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)));
        }
      }
    }
  }
  return Mesh(dim, std::move(verts), std::move(conn));
}

Mesh Mesh::Read(std::istream &in)
{
  int dim = 0;
  long nv = 0, ne = 0;
  if (!(in >> dim >> nv >> ne) || nv < 0 || ne < 0)
  {
    throw std::runtime_error("Mesh file: malformed header (expected: dim n_vertices n_elements)");
  }
  if (dim != 2 && dim != 3)
  {
    throw std::runtime_error("Mesh file: dimension must be 2 or 3");
  }
  std::vector<Point> verts(nv, Point{0.0, 0.0, 0.0});
  for (long v = 0; v < nv; v++)
  {
    for (int d = 0; d < dim; d++)
    {
      if (!(in >> verts[v][d]))
      {
        throw std::runtime_error("Mesh file: truncated vertex block");
      }
    }
  }
  std::vector<Index> conn(static_cast<std::size_t>(ne) * (1 << dim));
  for (auto &c : conn)
  {
    if (!(in >> c))
    {
      throw std::runtime_error("Mesh file: truncated element block");
    }
  }
  return Mesh(dim, std::move(verts), std::move(conn));
}

void Mesh::Write(std::ostream &out) const
{
  out << dim << ' ' << NumVertices() << ' ' << NumElements() << '\n';
  out << std::setprecision(17);
  for (const auto &p : vertices)
  {
    for (int d = 0; d < dim; d++)
    {
      out << p[d] << (d + 1 < dim ? ' ' : '\n');
    }
  }
  const int nc = CornersPerElement();
  for (Index k = 0; k < num_elements; k++)
  {
    for (int c = 0; c < nc; c++)
    {
      out << corners[k * nc + c] << (c + 1 < nc ? ' ' : '\n');
    }
  }
}

std::span<const Index> Mesh::ElementCorners(Index k) const
{
  const int nc = CornersPerElement();
  return {corners.data() + static_cast<std::size_t>(k) * nc, static_cast<std::size_t>(nc)};
}

const Point &Mesh::Corner(Index k, int c) const
{
  return vertices[corners[static_cast<std::size_t>(k) * CornersPerElement() + c]];
}

void Mesh::BuildFaces()
{
  const int nf = FacesPerElement();
  neighbors.assign(static_cast<std::size_t>(num_elements) * nf, -1);
  std::unordered_map<FaceKey, std::pair<Index, int>, FaceKeyHash> open;
  open.reserve(static_cast<std::size_t>(num_elements) * dim);
  std::vector<std::vector<int>> face_corners(nf);
  for (int f = 0; f < nf; f++)
  {
    face_corners[f] = LocalFaceCorners(dim, f);
  }
  interior_faces.clear();
  for (Index k = 0; k < num_elements; k++)
  {
    for (int f = 0; f < nf; f++)
    {
      FaceKey key{{-1, -1, -1, -1}};
      for (std::size_t i = 0; i < face_corners[f].size(); i++)
      {
        key.v[i] = corners[static_cast<std::size_t>(k) * CornersPerElement() + face_corners[f][i]];
      }
      std::sort(key.v.begin(), key.v.begin() + face_corners[f].size());
      auto it = open.find(key);
      if (it == open.end())
      {
        open.emplace(key, std::make_pair(k, f));
      }
      else
      {
        const auto [k0, f0] = it->second;
        if (k0 == k)
        {
          throw std::invalid_argument("Degenerate element with two identical faces");
        }
        interior_faces.push_back({k0, k, f0, f});
        neighbors[static_cast<std::size_t>(k0) * nf + f0] = k;
        neighbors[static_cast<std::size_t>(k) * nf + f] = k0;
        open.erase(it);
      }
    }
  }
  std::sort(interior_faces.begin(), interior_faces.end(),
            [](const InteriorFace &a, const InteriorFace &b)
            { return a.plus != b.plus ? a.plus < b.plus : a.face_plus < b.face_plus; });
  boundary_faces.clear();
  for (Index k = 0; k < num_elements; k++)
  {
    for (int f = 0; f < nf; f++)
    {
      if (neighbors[static_cast<std::size_t>(k) * nf + f] < 0)
      {
        boundary_faces.push_back({k, f});
      }
    }
  }
}

Point Mesh::MapToPhysical(Index k, const Point &xi) const
{
  Point x{0.0, 0.0, 0.0};
  if (IsBox(k))
  {
    const Point &x0 = Corner(k, 0);
    for (int d = 0; d < dim; d++)
    {
      x[d] = x0[d] + xi[d] * (Corner(k, 1 << d)[d] - x0[d]);
    }
    return x;
  }
  for (int c = 0; c < CornersPerElement(); c++)
  {
    const double n = ShapeValue(dim, c, xi);
    const Point &xc = Corner(k, c);
    for (int d = 0; d < dim; d++)
    {
      x[d] += n * xc[d];
    }
  }
  return x;
}

Tensor Mesh::Jacobian(Index k, const Point &xi) const
{
  Tensor J{};
  if (IsBox(k))
  {
    const Point &x0 = Corner(k, 0);
    for (int d = 0; d < dim; d++)
    {
      J[d][d] = Corner(k, 1 << d)[d] - x0[d];
    }
    return J;
  }
  for (int c = 0; c < CornersPerElement(); c++)
  {
    const Point &xc = Corner(k, c);
    for (int j = 0; j < dim; j++)
    {
      const double dn = ShapeDerivative(dim, c, j, xi);
      for (int i = 0; i < dim; i++)
      {
        J[i][j] += dn * xc[i];
      }
    }
  }
  return J;
}

std::optional<Point> Mesh::MapToReference(Index k, const Point &x) const
{
  Point xi{0.5, 0.5, 0.0};
  if (dim == 3)
  {
    xi[2] = 0.5;
  }
  if (IsBox(k))
  {
    const Point &x0 = Corner(k, 0);
    for (int d = 0; d < dim; d++)
    {
      xi[d] = (x[d] - x0[d]) / (Corner(k, 1 << d)[d] - x0[d]);
    }
    return xi;
  }
  const BoundingBox box = ElementBoundingBox(k);
  double scale = 0.0;
  for (int d = 0; d < dim; d++)
  {
    scale = std::max(scale, box.Extent(d));
  }
  for (int it = 0; it < 60; it++)
  {
    const Point y = MapToPhysical(k, xi);
    double res = 0.0;
    for (int d = 0; d < dim; d++)
    {
      res = std::max(res, std::abs(y[d] - x[d]));
    }
    if (res <= 1e-14 * scale)
    {
      return xi;
    }
    const Tensor J = Jacobian(k, xi);
    // Solve J dxi = x - y by Cramer's rule.
    const double det = Determinant(dim, J);
    if (det == 0.0)
    {
      return std::nullopt;
    }
    Point r{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    Point dxi{0.0, 0.0, 0.0};
    for (int c = 0; c < dim; c++)
    {
      Tensor Jc = J;
      for (int i = 0; i < dim; i++)
      {
        Jc[i][c] = r[i];
      }
      dxi[c] = Determinant(dim, Jc) / det;
    }
    for (int d = 0; d < dim; d++)
    {
      xi[d] += dxi[d];
    }
  }
  const Point y = MapToPhysical(k, xi);
  double res = 0.0;
  for (int d = 0; d < dim; d++)
  {
    res = std::max(res, std::abs(y[d] - x[d]));
  }
  if (res <= 1e-10 * scale)
  {
    return xi;
  }
  return std::nullopt;
}

Point Mesh::OutwardNormal(Index k, int local_face, const Point &xi) const
{
  const int dir = local_face / 2, side = local_face % 2;
  Point n{0.0, 0.0, 0.0};
  if (IsBox(k))
  {
    n[dir] = side ? 1.0 : -1.0;
    return n;
  }
  const Tensor J = Jacobian(k, xi);
  if (dim == 2)
  {
    const int t = 1 - dir;
    n = {J[1][t], -J[0][t], 0.0};
  }
  else
  {
    const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;
    const Point a{J[0][t1], J[1][t1], J[2][t1]}, b{J[0][t2], J[1][t2], J[2][t2]};
    n = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  }
  // Orient along the reference outward direction.
  double s = 0.0, len = 0.0;
  for (int i = 0; i < dim; i++)
  {
    s += n[i] * J[i][dir];
    len += n[i] * n[i];
  }
  len = std::sqrt(len);
  const double sign = ((s > 0.0) == (side == 1)) ? 1.0 : -1.0;
  for (int i = 0; i < dim; i++)
  {
    n[i] *= sign / len;
  }
  return n;
}

double Mesh::ElementMeasure(Index k) const
{
  if (IsBox(k))
  {
    double v = 1.0;
    const Point &x0 = Corner(k, 0);
    for (int d = 0; d < dim; d++)
    {
      v *= Corner(k, 1 << d)[d] - x0[d];
    }
    return v;
  }
  double v = 0.0;
  const int nz = dim == 3 ? 3 : 1;
  for (int c = 0; c < nz; c++)
  {
    for (int b = 0; b < 3; b++)
    {
      for (int a = 0; a < 3; a++)
      {
        const Point xi{kG3x[a], kG3x[b], dim == 3 ? kG3x[c] : 0.0};
        const double w = kG3w[a] * kG3w[b] * (dim == 3 ? kG3w[c] : 1.0);
        v += w * Determinant(dim, Jacobian(k, xi));
      }
    }
  }
  return v;
}

double Mesh::LocalFaceMeasure(Index k, int local_face) const
{
  const int dir = local_face / 2, side = local_face % 2;
  if (IsBox(k))
  {
    double m = 1.0;
    const Point &x0 = Corner(k, 0);
    for (int d = 0; d < dim; d++)
    {
      if (d != dir)
      {
        m *= Corner(k, 1 << d)[d] - x0[d];
      }
    }
    return m;
  }
  double m = 0.0;
  const int nb = dim == 3 ? 3 : 1;
  for (int b = 0; b < nb; b++)
  {
    for (int a = 0; a < 3; a++)
    {
      Point xi{0.0, 0.0, 0.0};
      int t = 0;
      std::array<double, 2> s{kG3x[a], kG3x[b]};
      double w = kG3w[a] * (dim == 3 ? kG3w[b] : 1.0);
      for (int d = 0; d < dim; d++)
      {
        xi[d] = d == dir ? static_cast<double>(side) : s[t++];
      }
      const Tensor J = Jacobian(k, xi);
      if (dim == 2)
      {
        const int tt = 1 - dir;
        m += w * std::hypot(J[0][tt], J[1][tt]);
      }
      else
      {
        const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;
        const Point u{J[0][t1], J[1][t1], J[2][t1]}, v{J[0][t2], J[1][t2], J[2][t2]};
        const Point c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                      u[0] * v[1] - u[1] * v[0]};
        m += w * std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
      }
    }
  }
  return m;
}

double Mesh::FaceMeasure(Index f) const
{
  if (f < 0 || f >= NumInteriorFaces() + NumBoundaryFaces())
  {
    throw std::out_of_range("Face id out of range");
  }
  if (f < NumInteriorFaces())
  {
    const auto &face = interior_faces[f];
    return LocalFaceMeasure(face.plus, face.face_plus);
  }
  const auto &face = boundary_faces[f - NumInteriorFaces()];
  return LocalFaceMeasure(face.element, face.face);
}

BoundingBox Mesh::ElementBoundingBox(Index k) const
{
  if (k < 0 || k >= num_elements)
  {
    throw std::out_of_range("Element id out of range");
  }
  BoundingBox b = BoundingBox::Empty(dim);
  for (int c = 0; c < CornersPerElement(); c++)
  {
    b.Expand(Corner(k, c));
  }
  return b;
}

Index Mesh::FindElement(const Point &x, double tol) const
{
  for (Index k = 0; k < num_elements; k++)
  {
    const BoundingBox b = ElementBoundingBox(k);
    double scale = 0.0;
    for (int d = 0; d < dim; d++)
    {
      scale = std::max(scale, b.Extent(d));
    }
    if (!b.Contains(x, tol * scale))
    {
      continue;
    }
    if (auto xi = MapToReference(k, x))
    {
      bool inside = true;
      for (int d = 0; d < dim; d++)
      {
        inside = inside && (*xi)[d] >= -tol && (*xi)[d] <= 1.0 + tol;
      }
      if (inside)
      {
        return k;
      }
    }
  }
  return -1;
}

BoundingBox Mesh::DomainBoundingBox() const
{
  BoundingBox b = BoundingBox::Empty(dim);
  for (const auto &p : vertices)
  {
    b.Expand(p);
  }
  return b;
}

}  // namespace polymg
