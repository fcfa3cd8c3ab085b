"""Smoke test for the fraclab extension module.

Run after `maturin develop` (or with the built library on PYTHONPATH):

    python crates/python/python/smoke_test.py
"""

import math

import fraclab


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    # (-Δ)^{1/2} of the bubble (1 + |x|^2)^{-1} in R^3 is 2 (1 + |x|^2)^{-2}.
    bubble = fraclab.Field({"dim": 3, "kind": "bubble", "params": {"sigma": 0.5}})
    close(bubble([0.0, 0.0, 0.0]), 1.0, 1e-15)
    r = bubble.frac_laplacian(0.5, [0.0, 0.0, 0.0])
    close(r["value"], 2.0, 2e-3)
    x = [0.3, -0.4, 1.2]
    expected = 2.0 / (1.0 + sum(v * v for v in x)) ** 2
    close(bubble.frac_laplacian(0.5, x)["value"], expected, 1e-4)
    close(bubble.fourier_oracle(0.5, math.hypot(*x))["value"], expected, 1e-6)

    # Normalization constant at s = 1/2, n = 1 is 1/pi.
    close(fraclab.normalization_constant(1, 0.5), 1.0 / math.pi, 1e-12)

    circle = fraclab.CompactSet(
        {"dim": 3, "variant": "circle_in_r3", "center": [0, 0, 0], "radius": 1.0, "normal": [0, 0, 1]}
    )
    close(circle.distance([2.0, 0.0, 0.0]), 1.0, 1e-12)
    p, unique = circle.nearest_point([0.0, 3.0, 0.0])
    assert unique
    close(p[1], 1.0, 1e-12)
    assert circle.manifold_dim == 1

    plan = fraclab.bootstrap_exponents(3, 0.5, 1.2)
    assert plan["subcritical"] and plan["m0"] is not None

    report = fraclab.run(
        "bootstrap", {"problem": {"n": 3, "gamma": 0.5, "p": 1.2}}, seed=1, workers=1
    )
    assert report["pass"], report

    try:
        fraclab.Field({"dim": 3, "kind": "ball_indicator", "params": {"radius": -1.0}})
    except ValueError:
        pass
    else:
        raise AssertionError("negative radius accepted")

    print(f"fraclab {fraclab.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
