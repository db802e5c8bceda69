"""
Variable names shared by the constraint builders.

Recourse variables copied into the master for iteration ``l`` carry an
``@l`` suffix so the same builder produces both the subproblem and the cut.
"""
from typing import Optional


def _suffix(copy: Optional[int]) -> str:
    return "" if copy is None else f"@{copy}"


def I(h: int, n: str, p: str) -> str:  # noqa: E743
    return f"I[{h},{n},{p}]"


def T(h: int) -> str:
    return f"T[{h}]"


def T_transport(h: int) -> str:
    return f"Tt[{h}]"


def E(h: int) -> str:
    return f"E[{h}]"


def B(h: int, m: str) -> str:
    return f"B[{h},{m}]"


def flow_abs(h: int, m: str) -> str:
    return f"F[{h},{m}]"


def alpha(h: int, n: str, p: str) -> str:
    return f"alpha[{h},{n},{p}]"


def combo_aux(h: int, k: int, target: Optional[str] = None) -> str:
    return f"Y[{h},{k}]" if target is None else f"Y[{h},{k},{target}]"


def state_aux(h: int, state: str) -> str:
    return f"s[{h},{state}]"


def zeta(h: int) -> str:
    return f"zeta[{h}]"


def theta(h: int, state: str) -> str:
    return f"theta[{h},{state}]"


def E_EU(h: int, copy: Optional[int] = None) -> str:
    return f"E_EU[{h}]{_suffix(copy)}"


def E_LU(h: int, copy: Optional[int] = None) -> str:
    return f"E_LU[{h}]{_suffix(copy)}"


def E_SU(h: int, copy: Optional[int] = None) -> str:
    return f"E_SU[{h}]{_suffix(copy)}"


def S(h: int, copy: Optional[int] = None) -> str:
    return f"S[{h}]{_suffix(copy)}"


def E_net(h: int, copy: Optional[int] = None) -> str:
    return f"Enet[{h}]{_suffix(copy)}"


def E_fr(h: int, copy: Optional[int] = None) -> str:
    return f"Efr[{h}]{_suffix(copy)}"


def B_ss(h: int, m: str, copy: Optional[int] = None) -> str:
    return f"Bss[{h},{m}]{_suffix(copy)}"


def byproduct_gate(h: int, m: str, state: str, copy: Optional[int] = None) -> str:
    return f"z[{h},{m},{state}]{_suffix(copy)}"


PSI = "psi"
