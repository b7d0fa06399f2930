import math

import numpy as np
import pytest

from reduced_measures.grids import (
    GridFunction,
    build_grid,
    integrate,
    negative_laplacian,
    sphere_area,
)
from reduced_measures.measures import DiscreteMeasure
from reduced_measures.solver import assemble_rhs


def test_cell_volumes_partition_the_domain_minus_boundary_layer():
    # nodes are interior, so the cells tile the domain with the Dirichlet
    # half-cell layer removed; domain_volume keeps the continuum value
    g1 = build_grid("interval1d", 2.0**-6, length=1.5)
    assert np.isclose(g1.cell_volumes.sum(), 1.5 - g1.h, rtol=1e-12)
    assert g1.domain_volume == 1.5

    g2 = build_grid("radialN", 2.0**-7, dim=2, radius=1.0)
    assert np.isclose(g2.cell_volumes.sum(), math.pi * (1.0 - g2.h / 2) ** 2, rtol=1e-10)
    assert np.isclose(g2.domain_volume, math.pi)

    g3 = build_grid("radialN", 2.0**-7, dim=3, radius=0.5)
    assert np.isclose(
        g3.cell_volumes.sum(), 4.0 / 3.0 * math.pi * (0.5 - g3.h / 2) ** 3, rtol=1e-10
    )
    assert np.isclose(g3.domain_volume, 4.0 / 3.0 * math.pi * 0.5**3)

    gr = build_grid("rect2d", 2.0**-5, extents=(2.0, 1.0))
    assert np.isclose(gr.cell_volumes.sum(), (2.0 - gr.h) * (1.0 - gr.h), rtol=1e-12)
    assert gr.domain_volume == 2.0


def test_unit_sphere_area_closed_forms():
    assert np.isclose(sphere_area(2), 2.0 * math.pi)
    assert np.isclose(sphere_area(3), 4.0 * math.pi)


def test_owner_node_snaps_to_nearest_cell():
    g = build_grid("interval1d", 2.0**-5, length=1.0)
    for x in (0.1, 0.5, 0.73):
        node, gap = g.owner_node(x)
        assert abs(float(g.nodes[node]) - x) <= g.h
        assert gap <= g.h / 2

    gr = build_grid("rect2d", 2.0**-4, extents=(1.0, 1.0))
    node, gap = gr.owner_node((0.25, 0.75))
    assert np.allclose(gr.nodes[node], (0.25, 0.75), atol=gr.h)
    assert gap == 0.0
    with pytest.raises(ValueError):
        gr.owner_node((1.5, 0.5))


def test_boundary_ring_and_interior_are_disjoint():
    g = build_grid("rect2d", 2.0**-4, extents=(1.0, 1.0))
    ring = g.boundary_adjacent
    interior = g.interior_mask(4 * g.h)
    assert ring.any()
    assert not (ring & interior).any()


def test_operator_is_an_m_matrix_and_apply_matches_matrix():
    g = build_grid("radialN", 2.0**-6, dim=2, radius=1.0)
    op = negative_laplacian(g)
    mat = op.matrix.tocsr()
    diag = mat.diagonal()
    assert (diag > 0).all()
    dense = mat.toarray()
    np.fill_diagonal(dense, 0.0)
    assert (dense <= 1e-14).all()

    x = np.sin(np.linspace(0, 3, g.n_nodes))
    assert np.allclose(op.apply(x), mat @ x)


def test_interval_green_function_is_exact_at_nodes():
    # -u'' = delta_s on (0,1) with zero boundary values has the tent
    # u(x) = x (1-s) below s; the three-point scheme reproduces it exactly
    g = build_grid("interval1d", 2.0**-7, length=1.0)
    op = negative_laplacian(g)
    s = float(g.nodes[g.owner_node(0.5)[0]])
    mu = DiscreteMeasure.from_atoms(g, [(s, 1.0)])
    u = op.solve(assemble_rhs(g, mu))
    x = np.asarray(g.nodes)
    exact = np.where(x <= s, x * (1 - s), s * (1 - x))
    assert np.max(np.abs(u - exact)) <= 1e-10


def test_radial_green_function_matches_log_profile():
    g = build_grid("radialN", 2.0**-9, dim=2, radius=1.0)
    op = negative_laplacian(g)
    mu = DiscreteMeasure.from_atoms(g, [(0.0, 2.0 * math.pi)])
    u = op.solve(assemble_rhs(g, mu))
    r = np.abs(np.asarray(g.nodes))
    sample = (r > 0.05) & (r < 0.8)
    exact = np.log(1.0 / r[sample])
    assert np.max(np.abs(u[sample] - exact)) <= 0.01 * np.max(exact)


def test_integrate_matches_dot_with_volumes():
    g = build_grid("radialN", 2.0**-6, dim=3, radius=1.0)
    values = np.cos(np.linspace(0, 2, g.n_nodes))
    f = GridFunction(g, values)
    assert np.isclose(integrate(f), float(np.sum(values * g.cell_volumes)))


def test_build_grid_rejects_unknown_kind():
    with pytest.raises(ValueError):
        build_grid("triangular", 0.1)
