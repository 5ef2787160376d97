#pragma once

namespace protoflow {

/// Integer pixel rectangle in layout-canvas coordinates.
struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Canvas {
    int width = 0;
    int height = 0;

    friend bool operator==(const Canvas&, const Canvas&) = default;
};

/// Maps a canvas-space box onto an image of `image_width` x `image_height`.
/// Edges are scaled independently with round-half-up and clamped to the
/// image, so the result may be empty for tiny boxes; callers check.
BBox scale_to_image(const BBox& box, const Canvas& canvas, int image_width, int image_height);

}  // namespace protoflow
