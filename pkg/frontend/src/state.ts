/**
 * Viewer state: everything that defines a frame request, serializable to the
 * URL query so views are shareable. All numeric fields are clamped into the
 * ranges the sliders expose.
 */

export const SHADING_MODES = ["none", "phong", "sbrc", "shell", "cone"] as const;
export type ShadingMode = (typeof SHADING_MODES)[number];

export const TF_PRESETS = ["linear", "soft-gray", "hot", "bone"] as const;
export type TfPreset = (typeof TF_PRESETS)[number];

export const STEP_DENOMINATORS = [128, 256, 512] as const;
export type StepDenominator = (typeof STEP_DENOMINATORS)[number];

export interface OrbitState {
	azimuthDeg: number;
	elevationDeg: number;
}

export interface CameraOrbit extends OrbitState {
	distance: number;
}

export interface ViewerState {
	dataset: string | null;
	camera: CameraOrbit;
	light: OrbitState;
	shading: ShadingMode;
	nSlices: number; // 16..512
	bufferRes: number; // 64..512 (square)
	stepDenominator: StepDenominator; // sample step = 1/denominator
	tfPreset: TfPreset;
	compareWith: ShadingMode | null;
}

export const LIMITS = {
	nSlices: { min: 16, max: 512 },
	bufferRes: { min: 64, max: 512 },
	distance: { min: 1.2, max: 5.0 },
	elevationDeg: { min: -89, max: 89 },
} as const;

export function defaultState(): ViewerState {
	return {
		dataset: null,
		camera: { azimuthDeg: 30, elevationDeg: 20, distance: 2.2 },
		light: { azimuthDeg: 120, elevationDeg: 45 },
		shading: "sbrc",
		nSlices: 128,
		bufferRes: 256,
		stepDenominator: 256,
		tfPreset: "linear",
		compareWith: null,
	};
}

function clampNumber(value: number, min: number, max: number): number {
	if (!Number.isFinite(value)) return min;
	return Math.min(max, Math.max(min, value));
}

function wrapDegrees(value: number): number {
	if (!Number.isFinite(value)) return 0;
	const wrapped = value % 360;
	return wrapped < 0 ? wrapped + 360 : wrapped;
}

function snapStep(value: number): StepDenominator {
	let best: StepDenominator = STEP_DENOMINATORS[0];
	for (const d of STEP_DENOMINATORS) {
		if (Math.abs(d - value) < Math.abs(best - value)) best = d;
	}
	return best;
}

/** Clamp every field into its slider range; unknown enums fall back to defaults. */
export function clampState(state: ViewerState): ViewerState {
	const d = defaultState();
	return {
		dataset: state.dataset,
		camera: {
			azimuthDeg: wrapDegrees(state.camera.azimuthDeg),
			elevationDeg: clampNumber(state.camera.elevationDeg, LIMITS.elevationDeg.min, LIMITS.elevationDeg.max),
			distance: clampNumber(state.camera.distance, LIMITS.distance.min, LIMITS.distance.max),
		},
		light: {
			azimuthDeg: wrapDegrees(state.light.azimuthDeg),
			elevationDeg: clampNumber(state.light.elevationDeg, LIMITS.elevationDeg.min, LIMITS.elevationDeg.max),
		},
		shading: SHADING_MODES.includes(state.shading) ? state.shading : d.shading,
		nSlices: Math.round(clampNumber(state.nSlices, LIMITS.nSlices.min, LIMITS.nSlices.max)),
		bufferRes: Math.round(clampNumber(state.bufferRes, LIMITS.bufferRes.min, LIMITS.bufferRes.max)),
		stepDenominator: snapStep(state.stepDenominator),
		tfPreset: TF_PRESETS.includes(state.tfPreset) ? state.tfPreset : d.tfPreset,
		compareWith:
			state.compareWith !== null && SHADING_MODES.includes(state.compareWith)
				? state.compareWith
				: null,
	};
}

const NUM = (v: string | null, fallback: number): number => {
	const parsed = v === null ? NaN : Number(v);
	return Number.isFinite(parsed) ? parsed : fallback;
};

export function serializeState(state: ViewerState): string {
	const q = new URLSearchParams();
	if (state.dataset !== null) q.set("ds", state.dataset);
	q.set("caz", String(state.camera.azimuthDeg));
	q.set("cel", String(state.camera.elevationDeg));
	q.set("cd", String(state.camera.distance));
	q.set("laz", String(state.light.azimuthDeg));
	q.set("lel", String(state.light.elevationDeg));
	q.set("sh", state.shading);
	q.set("n", String(state.nSlices));
	q.set("res", String(state.bufferRes));
	q.set("step", String(state.stepDenominator));
	q.set("tf", state.tfPreset);
	if (state.compareWith !== null) q.set("cmp", state.compareWith);
	return q.toString();
}

export function parseState(query: string): ViewerState {
	const q = new URLSearchParams(query);
	const d = defaultState();
	return clampState({
		dataset: q.get("ds"),
		camera: {
			azimuthDeg: NUM(q.get("caz"), d.camera.azimuthDeg),
			elevationDeg: NUM(q.get("cel"), d.camera.elevationDeg),
			distance: NUM(q.get("cd"), d.camera.distance),
		},
		light: {
			azimuthDeg: NUM(q.get("laz"), d.light.azimuthDeg),
			elevationDeg: NUM(q.get("lel"), d.light.elevationDeg),
		},
		shading: (q.get("sh") ?? d.shading) as ShadingMode,
		nSlices: NUM(q.get("n"), d.nSlices),
		bufferRes: NUM(q.get("res"), d.bufferRes),
		stepDenominator: NUM(q.get("step"), d.stepDenominator) as StepDenominator,
		tfPreset: (q.get("tf") ?? d.tfPreset) as TfPreset,
		compareWith: (q.get("cmp") as ShadingMode | null) ?? null,
	});
}
