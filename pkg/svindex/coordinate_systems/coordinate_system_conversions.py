import numpy as np

from svindex.core.exceptions import InvalidGeometryError

# mean earth radius (WGS84), km
EARTH_RADIUS_KM = 6371.0088
KM_PER_DEGREE_LAT = np.pi * EARTH_RADIUS_KM / 180.0

####################################################################
#Geographic (lat, lon degrees) and local Cartesian (north, east km)
####################################################################

def geographic_to_local_km(points:np.ndarray, origin:np.ndarray)->np.ndarray:
    """
    Convert an Nx2 array of (lat, lon) degrees to (north, east) km offsets from origin,
    using the equirectangular approximation at the origin latitude.

    Parameters:
        points (ndarray): Nx2 array where each row is (lat, lon) in degrees.
        origin (ndarray): (lat, lon) in degrees of the local frame origin.

    Returns:
        ndarray: Nx2 array where each row is (north, east) in km.
    """
    if (points.ndim == 2 and points.shape[1] == 2):
        lat0 = np.radians(origin[0])
        north = (points[:, 0] - origin[0]) * KM_PER_DEGREE_LAT
        east = (points[:, 1] - origin[1]) * KM_PER_DEGREE_LAT * np.cos(lat0)
        return np.column_stack((north, east))
    else:
        raise InvalidGeometryError("geographic_to_local_km: input points must be an Nx2 array of points.")

def local_km_to_geographic(points:np.ndarray, origin:np.ndarray)->np.ndarray:
    """
    Convert an Nx2 array of (north, east) km offsets back to (lat, lon) degrees.

    Parameters:
        points (ndarray): Nx2 array where each row is (north, east) in km.
        origin (ndarray): (lat, lon) in degrees of the local frame origin.

    Returns:
        ndarray: Nx2 array where each row is (lat, lon) in degrees.
    """
    if (points.ndim == 2 and points.shape[1] == 2):
        lat0 = np.radians(origin[0])
        cos_lat0 = np.cos(lat0)
        if np.isclose(cos_lat0, 0.0):
            raise InvalidGeometryError("local_km_to_geographic: origin latitude is at a pole.")
        lat = origin[0] + points[:, 0] / KM_PER_DEGREE_LAT
        lon = origin[1] + points[:, 1] / (KM_PER_DEGREE_LAT * cos_lat0)
        return np.column_stack((lat, lon))
    else:
        raise InvalidGeometryError("local_km_to_geographic: input points must be an Nx2 array of points.")

####################################################################
#Query range sides (km) and dataset units
####################################################################

def km_side_to_spans(side_km:float, units:str="plane", latitude:float=0.0, plane_units_per_km:float=1.0)->tuple:
    """
    Convert the side of a square spatial range (km) to (x, y) spans in dataset units.

    Parameters:
        side_km (float): side length of the square range in km.
        units (str): "degrees" for (lat, lon) datasets, "plane" for synthetic plane units.
        latitude (float): latitude (degrees) the range is centered on; degrees only.
        plane_units_per_km (float): scale factor; plane only.

    Returns:
        tuple: (x span, y span) in dataset units.
    """
    if side_km < 0:
        raise InvalidGeometryError(f"km_side_to_spans: side must be >= 0, got {side_km}")
    if units == "plane":
        if plane_units_per_km <= 0:
            raise InvalidGeometryError(f"km_side_to_spans: scale must be > 0, got {plane_units_per_km}")
        span = side_km * plane_units_per_km
        return (span, span)
    elif units == "degrees":
        half = np.array([[side_km / 2.0, side_km / 2.0]])
        corner = local_km_to_geographic(half, np.array([latitude, 0.0]))
        return (2.0 * (corner[0, 0] - latitude), 2.0 * corner[0, 1])
    else:
        raise InvalidGeometryError(f"km_side_to_spans: unknown units {units!r}")
