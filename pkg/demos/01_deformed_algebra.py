"""Tour of the deformed product: what it computes, where it stops being
a number, and how the deformed logarithm linearizes it."""

import numpy as np

import qlognorm as ql


def main():
    print("deformed log/exp at a few deformations")
    for q in (0.5, 1.0, 1.5):
        xs = [0.25, 1.0, 4.0]
        cells = ", ".join(f"ln_q({x}) = {ql.q_log(x, q):+.6f}" for x in xs)
        print(f"  q = {q}: {cells}")

    print("\nround trip exp_q(ln_q(x)) = x")
    for q in (0.3, 0.8, 1.25):
        x = 2.71828
        back = ql.q_exp(ql.q_log(x, q), q)
        print(f"  q = {q}: {back:.12f}")

    print("\nthe deformed product against the plain one (q = 0.8)")
    for x, y in ((2.0, 3.0), (0.5, 0.5), (10.0, 0.1)):
        out = ql.q_product(x, y, 0.8)
        print(f"  {x} (x) {y} = {out.value:.6f}   plain {x * y:.6f}   "
              f"region {out.region.name}")

    # For q > 1 the constraint sum can hit zero: the product diverges.
    q = 3.0
    x = 2.0
    y = 1.0 / np.sqrt(1.0 - x ** (1.0 - q))
    out = ql.q_product(x, y, q)
    print(f"\ndivergent pair at q = {q}: x = {x}, y = {y:.6f} -> "
          f"region {out.region.name}, value {out.value}")

    # Additivity: ln_q maps the deformed product to a sum, exactly.
    print("\nln_q(x (x) y) - (ln_q x + ln_q y) on random pairs (q = 1.3):")
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        x, y = np.exp(rng.uniform(-1.5, 1.5, 2))
        out = ql.q_product(x, y, 1.3)
        if out.region is ql.Region.REGULAR and out.value > 0:
            lhs = ql.q_log(out.value, 1.3)
            rhs = ql.q_log(x, 1.3) + ql.q_log(y, 1.3)
            worst = max(worst, abs(lhs - rhs))
    print(f"  worst absolute gap over 1000 regular pairs: {worst:.3e}")


if __name__ == "__main__":
    main()
