"""Closed-form model values frozen into the unit and acceptance tests."""
import math

alpha, beta_a, beta_b = 2.6e-3, 1.4e-3, 3.4e-3
eta_s, eta_x = 0.025, 0.203


def singles(i, beta):
    return eta_s * (alpha * i * i + beta * i)


def c_s(i):
    return eta_x * eta_s * eta_s * alpha * i * i


def c_r(i):
    return eta_s * eta_s * (alpha * i * i + beta_a * i) * (alpha * i * i + beta_b * i)


def car(i):
    return c_s(i) / c_r(i)


p_both = eta_x * eta_s * eta_s
p_a_only = eta_s - p_both
print("p_both", p_both, "p_a_only", p_a_only, "p_none", 1 - 2 * eta_s + p_both)
print("C_A(1.6)", singles(1.6, beta_a), "C_B(1.6)", singles(1.6, beta_b))
print("C_S(1.6)", c_s(1.6), "C_R(1.6)", c_r(1.6), "CAR(1.6)", car(1.6))
print("CAR_max", eta_x * alpha / (beta_a * beta_b), "CAR'_max", alpha / (beta_a * beta_b))
print("I* singles A", beta_a / alpha, "B", beta_b / alpha, "C_R slope 3", math.sqrt(beta_a * beta_b) / alpha)

area = math.pi * (50e-4) ** 2
i_cw = 1e-3 * 1e9 / area
pair = alpha * 1e-12 * i_cw ** 2
print("area_cm2", area, "I_cw", i_cw, "pair_hz", pair, "det_hz", pair * eta_s ** 2)
f = alpha ** -0.5
e_nj = 3.186 * 1.602176634e-19 * 1e9
print("F", f, "E_nj", e_nj, "N", f * area / e_nj)

dens = [0.05 * (16 / 0.05) ** (k / 7) for k in range(8)]
print("sweep", [round(d, 6) for d in dens])
print("car", [round(car(d), 3) for d in dens])
