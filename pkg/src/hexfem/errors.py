"""Exception types shared across the package."""


class HexFemError(Exception):
    """Base class for all hexfem errors."""


class MeshFormatError(HexFemError):
    """Malformed mesh or matrix file."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class MeshValidationError(HexFemError):
    """Mesh data violates a structural invariant (index bounds, duplicates, coefficients)."""


class DegenerateElementError(HexFemError):
    """Non-positive Jacobian determinant at a Gauss point."""

    def __init__(self, element_id=None, gauss_point=None, det=None):
        self.element_id = element_id
        self.gauss_point = gauss_point
        self.det = det
        parts = ["degenerate element"]
        if element_id is not None:
            parts.append(f"id={element_id}")
        if gauss_point is not None:
            parts.append(f"gauss point {gauss_point}")
        if det is not None:
            parts.append(f"det(J)={det!r}")
        super().__init__(": ".join([parts[0], ", ".join(parts[1:])]) if len(parts) > 1 else parts[0])

    # survives pickling across process-pool workers
    def __reduce__(self):
        return (DegenerateElementError, (self.element_id, self.gauss_point, self.det))


class ConfigurationError(HexFemError):
    """Invalid runtime configuration (memory budget, mode, worker count)."""


class StagingError(HexFemError):
    """A batch group does not fit the backend's advertised capacity."""

    def __init__(self, group_index, needed_bytes, capacity_bytes):
        self.group_index = group_index
        self.needed_bytes = needed_bytes
        self.capacity_bytes = capacity_bytes
        super().__init__(
            f"group {group_index} needs {needed_bytes} bytes but backend capacity is {capacity_bytes}"
        )

    def __reduce__(self):
        return (StagingError, (self.group_index, self.needed_bytes, self.capacity_bytes))
