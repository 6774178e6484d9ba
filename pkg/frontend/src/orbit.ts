/** Orbit parameterization around the unit-cube center. */

import type { CameraOrbit, OrbitState } from "./state.js";

export const CUBE_CENTER: [number, number, number] = [0.5, 0.5, 0.5];

const rad = (deg: number) => (deg * Math.PI) / 180;

/**
 * Camera position on the orbit sphere. At azimuth 0 / elevation 0 the camera
 * sits on the -z side looking toward +z.
 */
export function cameraPosition(orbit: CameraOrbit): [number, number, number] {
	const el = rad(orbit.elevationDeg);
	const az = rad(orbit.azimuthDeg);
	const r = orbit.distance;
	return [
		CUBE_CENTER[0] + r * Math.cos(el) * Math.sin(az),
		CUBE_CENTER[1] + r * Math.sin(el),
		CUBE_CENTER[2] - r * Math.cos(el) * Math.cos(az),
	];
}

/**
 * Direction the light travels. At azimuth 0 / elevation 0 the light comes
 * from the camera's home side, traveling toward +z.
 */
export function lightDirection(orbit: OrbitState): [number, number, number] {
	const el = rad(orbit.elevationDeg);
	const az = rad(orbit.azimuthDeg);
	return [
		-Math.cos(el) * Math.sin(az),
		-Math.sin(el),
		Math.cos(el) * Math.cos(az),
	];
}
