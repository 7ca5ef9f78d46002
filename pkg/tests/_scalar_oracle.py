"""Exact rational arithmetic for one step on the real line with singleton maps.

Independent of the package: it follows the three update lines literally
with Fraction values. Run directly to print the reference step.
"""
from fractions import Fraction as F


def scalar_step(x, t1, t2, t3, a, b, c, d, e, alpha, beta, gamma, s=0, s1=0, s2=0):
    """t1, t2, t3 map a Fraction to the single image point."""
    z = u1 = t1(x)
    w = (1 - a - b) * x + a * z + b * s
    u = v1 = t2(w)
    y = (1 - c - d - e) * x + c * u + d * u1 + e * s1
    v = t3(y)
    x_next = (1 - alpha - beta - gamma) * x + alpha * v + beta * v1 + gamma * s2
    return w, y, x_next


def half(x):
    return x / 2


def reference_step():
    return scalar_step(F(1), half, half, half, a=F(1, 2), b=0, c=F(1, 4), d=F(1, 4), e=0,
                       alpha=F(1, 4), beta=F(1, 4), gamma=0)


if __name__ == "__main__":
    w, y, x2 = reference_step()
    print(f"w1={w} y1={y} x2={x2} ({float(x2)!r})")
