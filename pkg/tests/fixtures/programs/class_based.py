from qiskit import QuantumCircuit


class BellFactory:
    shots = 1024

    def __init__(self, size):
        self.size = size

    def circuit(self):
        qc = QuantumCircuit(self.size, self.size)
        qc.h(0)
        qc.cx(0, 1)
        qc.measure_all()
        return qc


factory = BellFactory(2)
qc = factory.circuit()
