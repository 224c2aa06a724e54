"""Walk through the one-arrow quiver: bracket, moment map, 2-form, and a matrix check.

Run with ``python3 demos/one_arrow_walkthrough.py``.
"""

from ncqh import BASIC, omega_from_P, quiver_qp
from ncqh import polyvec as pv
from ncqh import repspace as rs
from ncqh import structures as st
from ncqh.ncalg import parse_element


def main():
    S = quiver_qp(BASIC)
    alg = S.alg
    a, b = parse_element(alg, "a"), parse_element(alg, "a*")

    print("P =", S.P)
    print("Φ =", {p: str(x) for p, x in S.phi.items()})
    print("{{a, a*}} =", pv.PBracket(S.P)(a, b))

    for check in (st.check_P1, st.check_P2, st.check_P3):
        r = check(S)
        print(f"{r.name}: {'pass' if r.passed else 'FAIL'} {r.detail}")

    Q = omega_from_P(S)
    print("ω =", Q.omega)
    print("B2:", st.check_B2(Q).passed, " C:", st.check_C(S.P, Q.omega, Q.phi, Q.phi_inv).passed)

    # 2x2 blocks at both vertices; everything below is exact rational arithmetic
    alpha = rs.DimensionVector.uniform(alg, 2)
    pt = rs.random_point(alg, alpha, seed=42)
    print("X(a) block:", [[str(v) for v in row] for row in pt.blocks[0]])
    print("rank of the non-degeneracy map:", rs.nondegeneracy_rank(S, pt)["rank"])
    print("compatibility holds:", rs.moment_check(S.P, Q.omega, rs.total_phi(S), pt)[0])


if __name__ == "__main__":
    main()
