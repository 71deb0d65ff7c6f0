"""Orbits of the subtractive algorithms and their natural extensions.

Every bundled algorithm is a piecewise linear map F(x) = M(x)^{-1} x on
the positive cone, with M constant on each branch cone.  The natural
extension pairs x with a dual vector a and acts by (M^{-1} x, M^T a),
preserving the scalar product <x, a> exactly.
"""

from fractions import Fraction as F

from mcf import (
    classify, get_algorithm, natext_state, natext_step, natext_inverse,
    step_linear, step_projective, to_section, from_section,
)

farey = get_algorithm("farey")

print("The two-dimensional map forgets where it came from:")
print("  (2, 5) ->", step_linear(farey, (2, 5)))
print("  (5, 3) ->", step_linear(farey, (5, 3)))

print("\nThe natural extension separates the two histories through the")
print("dual vector:")
s1 = natext_state((2, 5), (1, 1))
s2 = natext_state((5, 3), (1, 1))
for s in (s1, s2):
    label, t = natext_step(farey, s)
    back = natext_inverse(farey, label, t)
    print(f"  {s.x} x {s.a}  --{label}-->  {t.x} x {t.a}"
          f"   (invert: {back.x} x {back.a}, <x,a> = {t.e})")

print("\nA projective orbit of the three-dimensional reverse algorithm:")
reverse = get_algorithm("reverse")
x = (F(2, 9), F(3, 9), F(4, 9))
for n in range(6):
    label = classify(reverse, x).label
    print(f"  n={n}  branch {label}  x = {tuple(str(c) for c in x)}")
    label, x = step_projective(reverse, x)

print("\nSection coordinates (y, b, tau, e) of the scaling flow round-trip")
print("exactly in rational arithmetic:")
s = natext_state((F(1, 3), F(2, 3)), (2, 1))
p = to_section(s)
fmt = lambda v: "(" + ", ".join(str(c) for c in v) + ")"
print(f"  state {fmt(s.x)} x {fmt(s.a)} -> y={fmt(p.y)} b={fmt(p.b)} "
      f"tau(norm)={p.tau} e={p.e}")
back = from_section(p)
print(f"  back: {fmt(back.x)} x {fmt(back.a)}")
