from qiskit import ClassicalRegister, QuantumCircuit, QuantumRegister

qr = QuantumRegister(3, "q")
cr = ClassicalRegister(3, "c")
circuit = QuantumCircuit(qr, cr)
circuit.x(qr[0])
circuit.ccx(qr[0], qr[1], qr[2])
circuit.swap(qr[1], qr[2])
circuit.measure(qr, cr)
