"""Smoke test for the psum extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

from fractions import Fraction as F

import psum


def check(label, condition):
    print(("PASS " if condition else "FAIL ") + label)
    return condition


def main():
    results = []

    ih = psum.inverse_hypergeometric(2, 2, 5, 2)
    results.append(check("inverse hypergeometric entry", ih[0][0] == F(5, 18)))
    results.append(check("distribution sums to one", sum(map(sum, ih)) == 1))

    g = psum.derive_fixed_point_weights(ih)
    results.append(check("derived weights fix the target", psum.partial_sum_once(ih, g)["descendant"] == ih))
    results.append(check("limit recovers the target", psum.limit_distribution(g) == ih))

    v = psum.vectorize(ih)
    results.append(check("vectorize round trip", psum.devectorize(v, 3, 3) == ih))

    p_star = [[F(1, 2), F(1, 4)], [F(1, 4), 0]]
    g_osc = [[-1, 1], [1, 0]]
    report = psum.classify(p_star, g_osc)
    results.append(check("oscillation detected", report["verdict"] == "Oscillating" and report["period"] == 2))
    gens = psum.iterate(p_star, g_osc, 2)
    results.append(check("period-two generations", gens[1] == p_star and gens[0] != p_star))

    op = psum.build_operator(g_osc)
    results.append(check("operator dimension", op.dim == 4 and op.diagonal() == [-1, 1, 1, 0]))
    results.append(check("operator not power-method ready", not op.analyze()["power_method_applicable"]))
    try:
        psum.limit_distribution(g_osc)
        results.append(check("undefined limit raises", False))
    except psum.UndefinedError:
        results.append(check("undefined limit raises", True))

    uniform = [[F(1, 9)] * 3 for _ in range(3)]
    floats = psum.classify(uniform, g, tol=1e-12, backend="float")
    close = all(abs(a - float(b)) < 1e-9 for ra, rb in zip(floats["limit"], ih) for a, b in zip(ra, rb))
    results.append(check("float backend converges to target", floats["verdict"] == "Converged" and close))

    power = psum.power_iterate([[3], [-4]], [1, 1])
    results.append(check("power iteration", power["converged"] and abs(power["vector"][0] - 4 / 11) < 1e-9))

    try:
        psum.validate([[F(1, 2), F(1, 3)]])
        results.append(check("unnormalized input rejected", False))
    except psum.PsumError:
        results.append(check("unnormalized input rejected", True))

    if not all(results):
        raise SystemExit(1)


if __name__ == "__main__":
    main()
