#include "efrac/Mesh.hpp"

#include <cmath>

#include "efrac/Errors.hpp"

namespace efrac {

Mesh::Mesh(double Lx, double Ly, int nx, int ny)
    : Lx_(Lx), Ly_(Ly), nx_(nx), ny_(ny) {
  if (Lx <= 0.0 || Ly <= 0.0 || nx < 1 || ny < 1) {
    throw GeometryError("mesh requires positive extents and cell counts");
  }
  hx_ = Lx / nx;
  hy_ = Ly / ny;

  interior_.reserve((nx - 1) * ny + nx * (ny - 1));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      Face f;
      f.J = cellIndex(i, j);
      f.K = cellIndex(i + 1, j);
      f.area = hy_;
      f.normal = {1.0, 0.0};
      f.center = {(i + 1) * hx_, (j + 0.5) * hy_};
      f.side = Side::Left;
      interior_.push_back(f);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Face f;
      f.J = cellIndex(i, j);
      f.K = cellIndex(i, j + 1);
      f.area = hx_;
      f.normal = {0.0, 1.0};
      f.center = {(i + 0.5) * hx_, (j + 1) * hy_};
      f.side = Side::Bottom;
      interior_.push_back(f);
    }
  }

  auto addBoundary = [&](int cell, Side side, const Vec2& n, const Vec2& c,
                         double area) {
    Face f;
    f.J = cell;
    f.K = -1;
    f.area = area;
    f.normal = n;
    f.center = c;
    f.side = side;
    boundary_.push_back(f);
  };
  for (int j = 0; j < ny; ++j) {
    addBoundary(cellIndex(0, j), Side::Left, {-1.0, 0.0},
                {0.0, (j + 0.5) * hy_}, hy_);
    addBoundary(cellIndex(nx - 1, j), Side::Right, {1.0, 0.0},
                {Lx, (j + 0.5) * hy_}, hy_);
  }
  for (int i = 0; i < nx; ++i) {
    addBoundary(cellIndex(i, 0), Side::Bottom, {0.0, -1.0},
                {(i + 0.5) * hx_, 0.0}, hx_);
    addBoundary(cellIndex(i, ny - 1), Side::Top, {0.0, 1.0},
                {(i + 0.5) * hx_, Ly}, hx_);
  }
}

Vec2 Mesh::node(int a) const {
  const int i = a % (nx_ + 1);
  const int j = a / (nx_ + 1);
  return {i * hx_, j * hy_};
}

Vec2 Mesh::cellCenter(int c) const {
  const auto [i, j] = cellIJ(c);
  return {(i + 0.5) * hx_, (j + 0.5) * hy_};
}

std::array<int, 4> Mesh::cellNodes(int c) const {
  const auto [i, j] = cellIJ(c);
  return {nodeIndex(i, j), nodeIndex(i + 1, j), nodeIndex(i + 1, j + 1),
          nodeIndex(i, j + 1)};
}

std::array<Vec2, 4> Mesh::cellCorners(int c) const {
  const auto [i, j] = cellIJ(c);
  const double x0 = i * hx_, x1 = (i + 1) * hx_;
  const double y0 = j * hy_, y1 = (j + 1) * hy_;
  return {Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x1, y1}, Vec2{x0, y1}};
}

int Mesh::locate(const Vec2& p) const {
  const double tol = 1e-12 * h();
  if (p.x() < -tol || p.x() > Lx_ + tol || p.y() < -tol ||
      p.y() > Ly_ + tol) {
    throw GeometryError("point outside the domain");
  }
  int i = static_cast<int>(std::floor(p.x() / hx_));
  int j = static_cast<int>(std::floor(p.y() / hy_));
  i = std::min(std::max(i, 0), nx_ - 1);
  j = std::min(std::max(j, 0), ny_ - 1);
  return cellIndex(i, j);
}

std::vector<int> Mesh::boundaryNodes(Side s) const {
  std::vector<int> out;
  switch (s) {
    case Side::Left:
      for (int j = 0; j <= ny_; ++j) out.push_back(nodeIndex(0, j));
      break;
    case Side::Right:
      for (int j = 0; j <= ny_; ++j) out.push_back(nodeIndex(nx_, j));
      break;
    case Side::Bottom:
      for (int i = 0; i <= nx_; ++i) out.push_back(nodeIndex(i, 0));
      break;
    case Side::Top:
      for (int i = 0; i <= nx_; ++i) out.push_back(nodeIndex(i, ny_));
      break;
  }
  return out;
}

}  // namespace efrac
