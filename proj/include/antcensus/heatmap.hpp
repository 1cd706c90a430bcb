#pragma once

#include "antcensus/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace antcensus {

/// Fixed-resolution accumulation grid. Cells sit on integer lattice points:
/// cell (x, y) is at grid coordinates (x, y), stored row-major.
struct HeatGrid {
    int grid_w = 1000;
    int grid_h = 1000;
    ImageSize source_frame;     // frame the grid was set up for (informational)
    std::vector<double> cells;  // grid_h rows of grid_w, all >= 0

    double& at(int x, int y) { return cells[static_cast<std::size_t>(y) * grid_w + x]; }
    double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * grid_w + x]; }
};

HeatGrid make_grid(int grid_w, int grid_h, ImageSize source_frame);

/// Intensity falloff. The `standard` variant is exp(-d^2 / (2 r^2)); the
/// `literal` variant is exp(-d / (2 r^2)), a much flatter decay. Both are 1
/// at d = 0. Names match the CLI's --kernel values.
enum class KernelVariant { standard, literal };

struct KernelMode {
    KernelVariant variant = KernelVariant::standard;
    // Cells whose kernel value would fall below this are skipped. The support
    // radius solves kernel(d) = epsilon, turning the per-detection cost from
    // O(grid cells) into O(kernel support).
    double truncation_epsilon = 1e-4;
};

/// Euclidean distance between two grid points.
double grid_distance(double x, double y, double x0, double y0);

/// Adds every detection's kernel to the grid. Each box becomes a circle
/// (radius_mode), its center is scaled by (grid_w/W, grid_h/H) and its radius
/// by the mean of the two axis factors. Contributions sum linearly; the
/// summation order is detections in input order, cells row-major, so repeated
/// runs are bit-identical. This is the serial reference semantics.
void accumulate_serial(HeatGrid& grid, std::span<const PixelBox> dets, ImageSize frame,
                       const KernelMode& mode = {}, RadiusMode radius_mode = RadiusMode::mean_extent);

/// OpenMP version of accumulate_serial. Threads own disjoint row bands and
/// each applies all detections in input order to its band, so every cell sees
/// the same additions in the same order as the serial reference: results are
/// bit-identical to accumulate_serial, not merely close.
void accumulate(HeatGrid& grid, std::span<const PixelBox> dets, ImageSize frame,
                const KernelMode& mode = {}, RadiusMode radius_mode = RadiusMode::mean_extent);

/// Min-max normalization into [0,1]; a constant (e.g. all-zero) grid maps to
/// all zeros.
std::vector<double> scale_for_render(const HeatGrid& grid);

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

/// 256-entry color ramp by name. "inferno" (default everywhere) runs from
/// black through red/orange to near-white with monotone luminance; "gray" is
/// the identity ramp. Throws std::invalid_argument for unknown names.
const std::array<Rgb8, 256>& colormap_table(const std::string& name);

/// Maps scaled values (in [0,1], row-major, w x h) through a colormap to an
/// 8-bit RGB raster, one pixel per cell.
std::vector<Rgb8> render(std::span<const double> scaled, int w, int h,
                         const std::string& colormap = "inferno");

/// Raw grid as CSV: one row per grid row, comma-separated, shortest
/// round-trip formatting.
std::string write_grid_csv(const HeatGrid& grid);

} // namespace antcensus
