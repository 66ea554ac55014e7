#pragma once

#include "sgs/math.hpp"

namespace sgs {

// Pinhole camera. Internally OpenCV-style: +x right, +y down, +z forward;
// x_cam = rot_w2c * x_world + trans_w2c, pixel = (fx x/z + cx, fy y/z + cy)
// in continuous pixel coordinates (pixel (i, j) covers [i, i+1) x [j, j+1)).
struct CameraView {
    int width = 0, height = 0;
    double focal_x = 0.0, focal_y = 0.0;
    double cx = 0.0, cy = 0.0;
    Mat3 rot_w2c;
    Vec3 trans_w2c;
    double near = 0.01, far = 1000.0;

    Vec3 camera_position() const;  // world-space origin of the camera
    void validate() const;

    // Build from a camera-to-world pose in the OpenGL/NeRF convention
    // (+x right, +y up, -z forward) and a horizontal field of view.
    static CameraView from_c2w_gl(const Mat3& rot_c2w, const Vec3& origin, double fov_x_rad,
                                  int width, int height, double near_plane, double far_plane);

    bool operator==(const CameraView& o) const;
};

}  // namespace sgs
