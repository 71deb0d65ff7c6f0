"""Rendering dual-domain clouds: panels and the ARP fractal.

For reverse, cassaigne and brun the dual cloud fills a polytope.  For
the Arnoux-Rauzy-Poincare composition no closed-form domain is known;
its dual cloud looks fractal, with an order-3 symmetry realized by
cycling the simplex coordinates.  Images are written next to this
script as binary P6 files.
"""

import pathlib

from mcf import get_algorithm, orbit_cloud, render_fractal, render_panels, symmetry_probe

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

print("Four-panel view of the brun natural extension (x_n, a_n, and images):")
brun = get_algorithm("brun")
grids = render_panels(brun, orbit_cloud(brun, n=200_000, seed=2), resolution=512)
for key, grid in grids.items():
    path = out_dir / f"brun-{key.replace('_', '-')}.ppm"
    grid.write_ppm(path)
    print(f"  {path.name}: occupancy {grid.occupancy():.3f}")

print("\nARP dual cloud, 500k steps, window [-0.6, 0.6]^2:")
arp = get_algorithm("arp")
grid = render_fractal(arp, 500_000, resolution=1024, seed=1,
                      draw_order="poincare-last")
path = out_dir / "arp-fractal.ppm"
grid.write_ppm(path)
print(f"  {path.name}: occupancy {grid.occupancy():.3f}")

report = symmetry_probe(grid, arp)
print("  " + report.to_text().replace("\n", "\n  ").rstrip())

print("\nPoincare branches drawn last vs Arnoux-Rauzy branches drawn last:")
alt = render_fractal(arp, 500_000, resolution=1024, seed=1, draw_order="ar-last")
alt.write_ppm(out_dir / "arp-fractal-ar-last.ppm")
print("  arp-fractal-ar-last.ppm written (same support, different colors)")

print("\nZoomed window [0.05, 0.15]^2 at 2e6 steps:")
zoom = render_fractal(arp, 2_000_000, window=(0.05, 0.15, 0.05, 0.15),
                      resolution=512, seed=1)
zoom.write_ppm(out_dir / "arp-zoom.ppm")
print(f"  arp-zoom.ppm: occupancy {zoom.occupancy():.3f}")
