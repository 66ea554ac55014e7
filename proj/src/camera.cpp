#include "sgs/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace sgs {

Vec3 CameraView::camera_position() const {
    // origin = -R^T t
    const Mat3 rt = transpose(rot_w2c);
    const Vec3 p = mat_vec(rt, trans_w2c);
    return {-p.x, -p.y, -p.z};
}

void CameraView::validate() const {
    if (width <= 0 || height <= 0) throw std::runtime_error("camera viewport must be positive");
    if (focal_x <= 0 || focal_y <= 0) throw std::runtime_error("camera focal length must be positive");
    if (!(near < far)) throw std::runtime_error("camera near plane must be closer than far plane");
    // Orthonormality within 1e-4.
    const Mat3 rrt = mat_mul(rot_w2c, transpose(rot_w2c));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(rrt(i, j) - want) > 1e-4)
                throw std::runtime_error("camera rotation is not orthonormal");
        }
}

CameraView CameraView::from_c2w_gl(const Mat3& rot_c2w, const Vec3& origin, double fov_x_rad,
                                   int width, int height, double near_plane, double far_plane) {
    CameraView cam;
    cam.width = width;
    cam.height = height;
    cam.focal_x = 0.5 * width / std::tan(0.5 * fov_x_rad);
    cam.focal_y = cam.focal_x;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.near = near_plane;
    cam.far = far_plane;

    // GL camera axes -> CV camera axes: flip y and z columns.
    Mat3 c2w_cv = rot_c2w;
    for (int r = 0; r < 3; ++r) {
        c2w_cv(r, 1) = -c2w_cv(r, 1);
        c2w_cv(r, 2) = -c2w_cv(r, 2);
    }
    cam.rot_w2c = transpose(c2w_cv);
    const Vec3 t = mat_vec(cam.rot_w2c, origin);
    cam.trans_w2c = {-t.x, -t.y, -t.z};
    cam.validate();
    return cam;
}

bool CameraView::operator==(const CameraView& o) const {
    if (width != o.width || height != o.height) return false;
    if (focal_x != o.focal_x || focal_y != o.focal_y || cx != o.cx || cy != o.cy) return false;
    if (near != o.near || far != o.far) return false;
    for (int i = 0; i < 9; ++i)
        if (rot_w2c.m[i] != o.rot_w2c.m[i]) return false;
    return trans_w2c.x == o.trans_w2c.x && trans_w2c.y == o.trans_w2c.y &&
           trans_w2c.z == o.trans_w2c.z;
}

}  // namespace sgs
