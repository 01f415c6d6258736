"""
Randomized-benchmarking circuits and global folding
===================================================

An RB circuit is m uniformly random two-qubit Cliffords followed by the single
Clifford that undoes them, so the ideal output is |00> and the ideal
expectation of the all-zero projector is exactly 1. Global folding
U -> U (U^dag U)^n stretches the circuit by lambda = 1 + 2n without changing
its ideal action.
"""

from dszne import fold_global, generate_rb, run_exact, run_stabilizer
from dszne.rb_circuits import dumps, layers_of

circuit = generate_rb(n=2, m=5, rng=2024)
print(dumps(circuit))

# noiseless: both backends return exactly 1
print("exact, no noise:", run_exact(circuit, 0.0))
print("sampled, no noise:", run_stabilizer(circuit, 0.0, shots=2000, rng=1).value)

# folding triples, quintuples, ... the number of noisy layers
for lam in (1, 3, 5, 7):
    folded = fold_global(circuit, lam)
    print(f"lambda={lam}  layers={len(layers_of(folded)):3d}  E={run_exact(folded, 1e-3):.6f}")

# the sampled backend agrees with the density matrix within shot noise
rate = 2e-3
exact = run_exact(circuit, rate)
est = run_stabilizer(circuit, rate, shots=20_000, rng=7)
print(f"exact {exact:.5f}  sampled {est.value:.5f} +/- {est.std_error:.5f}")
