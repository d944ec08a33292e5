from qiskit import QuantumCircuit

angles = [0.1, 0.2, 0.3]
total = 0
for a in angles:
    total += a
qc = QuantumCircuit(1)
qc.rz(total, 0)
if total > 0.5:
    qc.x(0)
else:
    qc.h(0)
while total > 0:
    total -= 0.25
