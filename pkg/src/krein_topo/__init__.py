"""Krein-space signatures of transfer operators and edge invariants of periodic lattice models.

The package is organised bottom-up:

* :mod:`krein_topo.spectral`: Schur-based spectral clusters, Riesz projections
  and model collision paths;
* :mod:`krein_topo.krein`: symmetries, Krein inertia and the invariants
  Sig, Sec, half-signature and Z2-signature;
* :mod:`krein_topo.normal_forms`: canonical forms of fundamental, Real and
  chiral symmetries;
* :mod:`krein_topo.tight_binding`: Hamiltonians with rational flux, Bloch
  fibers and bulk transfer matrices;
* :mod:`krein_topo.edge`: half-space edge unitaries, crossings, invariants
  and a lattice Chern number;
* :mod:`krein_topo.models`: the Harper, Kane-Mele and BdG example models;
* :mod:`krein_topo.cli`: the ``krein-topo`` command.
"""

from .edge import (
    ContractingFrame,
    EdgeCrossing,
    chern_number,
    contracting_frame,
    edge_bands,
    edge_crossings,
    edge_invariants,
    edge_kind,
    edge_unitary,
    vertical_cell_transfer,
)
from .errors import *  # noqa: F401,F403
from .krein import (
    InvariantSet,
    KreinEigenvalue,
    Symmetry,
    SymmetryKind,
    check_symmetries,
    global_signature,
    half_signature,
    inertia_of_cluster,
    invariants_for_kind,
    krein_spectrum,
    secondary_invariant,
    z2_signature,
)
from .modelfile import load_model, save_model
from .models import d_id, harper, kane_mele, p_ip
from .normal_forms import (
    canonical_blocks,
    chiral_reduce,
    group_membership,
    normalize_fundamental,
    normalize_pair,
    normalize_triple,
    switch_symmetries,
)
from .spectral import collision_paths, contour_projection, decompose, riesz_projection
from .tight_binding import (
    HoppingModel,
    SymmetryMetadata,
    bloch_hamiltonian,
    bulk_transfer_fiber,
    bulk_transfer_spectrum,
    fiber_AB,
    gap_status,
)

__version__ = "0.1.0"
