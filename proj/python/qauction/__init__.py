"""Dense simulator for auctions run by discrete adiabatic search."""

from ._qauction import (
    Trajectory,
    bidding_operator,
    circuit_to_matrix,
    eigenvalue_tracks,
    first_price_table,
    locking_operator,
    min_error_povm,
    pauli_z_expansion,
    povm_optimality_check,
    probe_attack_basis,
    probe_attack_povm,
    run_adiabatic,
    run_collusion_defense,
    run_command,
    run_spurious_attack,
    spurious_table,
    verify_circuit,
)

__all__ = [
    "Trajectory",
    "bidding_operator",
    "circuit_to_matrix",
    "eigenvalue_tracks",
    "first_price_table",
    "locking_operator",
    "min_error_povm",
    "pauli_z_expansion",
    "povm_optimality_check",
    "probe_attack_basis",
    "probe_attack_povm",
    "run_adiabatic",
    "run_collusion_defense",
    "run_command",
    "run_spurious_attack",
    "spurious_table",
    "verify_circuit",
]
