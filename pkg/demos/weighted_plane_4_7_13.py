"""Walkthrough: rational-curve approximation on the (4, 7, 13) plane.

Builds the weighted projective plane P(4,7,13), runs the a-value chain and
the end-to-end driver for D ~ O(364) at the torus point [1:1:1], then
reproduces the coordinate side of the story: the smooth degree-20 curve,
the degree-39 double-point curve with tangents splitting over Q(sqrt(-3)),
the unique triple-point section of O(56), and the verdict that depends on
where sqrt(-3) lives.

Run:  python3 demos/weighted_plane_4_7_13.py
"""

from fractions import Fraction

from toricapprox import report
from toricapprox.approx import ArithmeticContext, theorem16_driver
from toricapprox.casestudy import (
    CPRIME,
    X5_EQ_YZ,
    blowup_selfintersection,
    casestudy_p4713,
    monomial_basis,
    mult_and_tangent_at_one,
    sections_vanishing_to_order,
    weighted_pairing,
)
from toricapprox.divisor import TorusDivisor
from toricapprox.fan import is_terminal, wps_fan


def main():
    q = (4, 7, 13)
    fan = wps_fan(q)
    print("rays of P(4,7,13):", fan.rays)
    print("terminal?", is_terminal(fan)[0], "(the driver records this)")

    d = TorusDivisor.of([91, 0, 0])  # O(364)
    res = theorem16_driver(fan, d, (), assume_canonically_bounded=True)
    print("\n-- driver --")
    print("a-value chain:", [(s.kind, str(s.a)) for s in res.chain.steps])
    print("curve ray degrees:", [str(x) for x in res.certificate.intersections])
    print("-K·C =", res.certificate.minus_k, " D-degree =", res.degree)
    print("alpha of the driver curve:", res.alpha)

    print("\n-- coordinate curves through [1:1:1] --")
    rep20 = mult_and_tangent_at_one(X5_EQ_YZ)
    print("x^5 = yz: degree 20, multiplicity", rep20.multiplicity,
          "=> alpha = ", weighted_pairing(q, 20, 364))
    rep39 = mult_and_tangent_at_one(CPRIME)
    print("degree-39 curve: multiplicity", rep39.multiplicity,
          "tangents split over Q(sqrt(", rep39.splitting, "))")

    print("\n-- sections of O(56) --")
    print("monomial basis:", monomial_basis(q, 56))
    secs = sections_vanishing_to_order(q, 56, 3)
    print("unique order-3 section:", secs[0])
    print("blowup self-intersection of 2·364 - 39·E:",
          blowup_selfintersection(q, 728, 39))

    print("\n-- verdicts by arithmetic context --")
    for name, ctx in (
        ("sqrt(-3) in k_v but not k", ArithmeticContext(True, ((-3, False, True),))),
        ("sqrt(-3) in k", ArithmeticContext(True, ((-3, True, True),))),
        ("sqrt(-3) in neither", ArithmeticContext(True, ((-3, False, False),))),
    ):
        rep = casestudy_p4713(ctx)
        print(f"[{name}] alpha(C') = {report.frac_to_str(rep.cprime_alpha)};",
              rep.verdict)


if __name__ == "__main__":
    main()
