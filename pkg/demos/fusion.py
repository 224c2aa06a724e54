"""Fuse the two vertices of the one-arrow quiver and compare with the loop quiver."""

from ncqh import BASIC, LOOP, fuse_structure, quiver_qp, same_structure
from ncqh import structures as st


def main():
    S = quiver_qp(BASIC)
    F = fuse_structure(S, 1, 2)
    print("fused P =", F.P)
    print("fused Φ =", F.phi[1])
    print("equals the loop structure:", same_structure(F, quiver_qp(LOOP)))
    r = st.check_P1(F)
    print("P1 at 1/12:", r.passed, "observed constant:", r.data.get("observed_constant"))


if __name__ == "__main__":
    main()
