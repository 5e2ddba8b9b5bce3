"""
A tomography functional on phantom images
=========================================

Images are sums of bright rectangles. The functional is the largest bin of a
coarse parallel-beam sinogram, a nonlinear but Lipschitz map from images to
numbers.
"""

from hilbapprox import build_approximant, sup_error
from hilbapprox.cli import make_functional
from hilbapprox.demos import FamilySpec, generate

spec = FamilySpec("image_phantom", (400, 200, 200), seed=0, n=1)
train, val, test = generate(spec)
f = make_functional({"name": "tomo", "angles": 4, "bins": 16}, spec.grid)

values = [f(x) for x in train.points[:5]]
print("first few functional values:", [round(v, 4) for v in values])

g = build_approximant(f, train, val, 0.01, seed=0)
md = g.metadata
print(f"{md['net_size']} centers, d = {md['dim']}, r = {md['r']}")
rep = sup_error(f, g, test)
print(f"test max error {rep['max_error']:.5f}, uncovered {rep['uncovered_count']}")
