"""Smoke test for the pyfracwiener extension.

Build first:  pip install --no-build-isolation -e crates/py
"""

import cmath
import math

import pyfracwiener as fw


def main() -> None:
    w = fw.generate_wiener(1000, 1e-3, 7)
    assert len(w) == 1001 and w[0] == 0.0

    x = fw.fractional_power_path(1000, 1e-3, 7)
    dx = [b - a for a, b in zip(x, x[1:])]
    dw = [b - a for a, b in zip(w, w[1:])]
    assert max(abs(d * d - v) for d, v in zip(dx, dw)) < 1e-12
    assert fw.square_check() <= 1e-12

    for xv, t in [(0.3, 0.5), (-1.2, 2.0)]:
        rotated = fw.schrodinger_kernel(xv, complex(0.0, -t))
        assert abs(rotated - fw.heat_kernel(xv, t)) < 1e-14
    assert abs(fw.schrodinger_kernel(0.0, 1.0)) == abs(1 / cmath.sqrt(4j * math.pi))

    kernel = fw.kernel_experiment()
    assert 1.8 <= kernel["sigma_ratio"] <= 2.2
    assert kernel["normality_p"] > 0.01

    dirac = fw.dirac_check(dims=4, samples=20_000)
    assert dirac["max_identity_error"] <= 1e-12
    assert dirac["max_z_score"] <= 3.0

    assert abs(fw.sphere_volume(2) - 8 * math.pi) < 2e-6

    try:
        fw.generate_wiener(10, -1.0, 0)
    except fw.FracError as e:
        assert isinstance(e, ValueError)
    else:
        raise AssertionError("negative dt accepted")

    print(
        f"pyfracwiener {fw.__version__}: ok "
        f"(sigma ratio {kernel['sigma_ratio']:.4f}, dirac z {dirac['max_z_score']:.2f})"
    )


if __name__ == "__main__":
    main()
