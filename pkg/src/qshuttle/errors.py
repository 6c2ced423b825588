"""Exception hierarchy for the qshuttle service stack."""


class QShuttleError(Exception):
    """Base class for all qshuttle errors."""


# --- routing ---------------------------------------------------------------

class NoRouteFound(QShuttleError):
    """No exclusion-respecting path exists between the requested endpoints."""


class SnapFailure(QShuttleError):
    """Origin or destination is farther than the snap radius from every node."""


class DegeneratePolyline(QShuttleError):
    """Polyline has zero total length and cannot be resampled."""


# --- simulation ------------------------------------------------------------

class RouteDiscontinuity(QShuttleError):
    """New route does not begin near the vehicle's current or projected position."""


# --- qubo ------------------------------------------------------------------

class EmptyFleet(QShuttleError):
    """QUBO construction was asked to run with no candidate routes at all."""


# --- solvers ---------------------------------------------------------------

class TooLarge(QShuttleError):
    """Problem exceeds the exhaustive solver's variable limit."""


class SolveTimeout(QShuttleError):
    """Remote solver did not respond within the configured timeout."""


class RemoteError(QShuttleError):
    """Remote solver responded with a failure."""


# --- fleet service ---------------------------------------------------------

class UnknownVehicle(QShuttleError):
    """Location update referenced a vehicle id the service does not know."""


class StaleTimestamp(QShuttleError):
    """Location update is not newer than the last stored point for the vehicle."""


class VehicleBusy(QShuttleError):
    """Trip start requested for a vehicle that already has an active trip."""


class NoActiveTrip(QShuttleError):
    """Trip end requested for a vehicle with no active trip."""


class NoActiveTrips(QShuttleError):
    """Optimization requested while no vehicle has an active trip."""


# --- analysis --------------------------------------------------------------

class EmptyHistory(QShuttleError):
    """Overlap metric was given an empty location history."""


class OffRoute(QShuttleError):
    """Live location is too far from the assigned route to project along it."""
