import os
import sys
import jinja2
import numpy as np


SVG_TEMPLATE = 'templates/svg/partition.svg'


def get_mod_dir():
    """Return parent directory of this Python module."""

    module_file = sys.modules[__name__].__file__
    mod_dir, _ = os.path.split(module_file)
    return mod_dir


def render_template(template, **content):
    """Render a jinja template found in the module or working directory."""

    loader = jinja2.FileSystemLoader([get_mod_dir(), os.getcwd()])
    env = jinja2.Environment(loader=loader, keep_trailing_newline=True)
    env.line_statement_prefix = '@'
    return env.get_template(template).render(**content)


def primal_edges(mesh):
    """(ne, 2) vertex index pairs of the primal edges."""

    if mesh.kind == 'tri':
        return mesh.edges

    M, N = mesh.shape
    i, j = np.meshgrid(np.arange(M + 1), np.arange(N + 1), indexing='xy')
    v = j * (M + 1) + i
    horizontal = np.stack([v[:, :-1].ravel(), v[:, 1:].ravel()], axis=-1)
    vertical = np.stack([v[:-1, :].ravel(), v[1:, :].ravel()], axis=-1)
    return np.concatenate([horizontal, vertical])


def generate_svg(mesh, dual=None, width=800.0, margin=10.0):
    """Generate an SVG drawing of a mesh and, optionally, its dual partition.

    Args:
        mesh (TriMesh or RectMesh): primal partition (solid lines).
        dual (DualPartition): control volumes (dashed polygons, class "dual").
        width (float): drawing width in pixels, the height keeps the aspect.
        margin (float): blank border in pixels.

    Returns:
        str: SVG 1.1 document.
    """

    domain = mesh.domain
    scale = width / domain.width
    height = domain.height * scale

    def to_svg(points):
        points = np.asarray(points, dtype=float)
        x = margin + (points[..., 0] - domain.a) * scale
        y = margin + (domain.d - points[..., 1]) * scale
        return np.stack([x, y], axis=-1)

    edges = [tuple('%.6f' % c for c in seg.ravel())
             for seg in to_svg(mesh.points[primal_edges(mesh)])]

    polygons = []
    if dual is not None:
        for volume in dual.control_volumes:
            polygons.append(' '.join('%.6f,%.6f' % tuple(p) for p in to_svg(volume.polygon)))

    return render_template(SVG_TEMPLATE,
                           width='%.6f' % (width + 2 * margin),
                           height='%.6f' % (height + 2 * margin),
                           edges=edges, polygons=polygons)
