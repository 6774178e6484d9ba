/** Render-service API: request assembly and response decoding. */

import { cameraPosition, lightDirection, CUBE_CENTER } from "./orbit.js";
import type { ShadingMode, ViewerState } from "./state.js";

export const VIEWPORT = 448;

export interface RenderRequestBody {
	dataset: string;
	transfer_function: string;
	camera: {
		position: [number, number, number];
		target: [number, number, number];
		up: [number, number, number];
		fov_deg: number;
	};
	light: { direction: [number, number, number]; color: [number, number, number] };
	shading: ShadingMode;
	n_slices: number;
	buffer_resolution: [number, number];
	step: number;
	viewport: [number, number];
	lookup_mode: string;
}

export interface FrameResponse {
	bytes: Blob;
	buildMs: number;
	renderMs: number;
}

export interface DatasetEntry {
	id: string;
	dims: [number, number, number];
	scalar_type: string;
}

export function buildRenderRequest(
	state: ViewerState,
	shadingOverride?: ShadingMode,
): RenderRequestBody {
	if (state.dataset === null) throw new Error("no dataset selected");
	return {
		dataset: state.dataset,
		transfer_function: state.tfPreset,
		camera: {
			position: cameraPosition(state.camera),
			target: CUBE_CENTER,
			up: [0, 1, 0],
			fov_deg: 45,
		},
		light: { direction: lightDirection(state.light), color: [1, 1, 1] },
		shading: shadingOverride ?? state.shading,
		n_slices: state.nSlices,
		buffer_resolution: [state.bufferRes, state.bufferRes],
		step: 1 / state.stepDenominator,
		viewport: [VIEWPORT, VIEWPORT],
		lookup_mode: "linear",
	};
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export async function postRender(
	body: RenderRequestBody,
	fetchImpl: FetchLike = fetch,
	baseUrl = "",
): Promise<FrameResponse> {
	const res = await fetchImpl(`${baseUrl}/render`, {
		method: "POST",
		headers: { "Content-Type": "application/json" },
		body: JSON.stringify(body),
	});
	if (!res.ok) {
		throw new Error(`render failed: HTTP ${res.status}`);
	}
	return {
		bytes: await res.blob(),
		buildMs: Number(res.headers.get("X-Build-Ms") ?? "0"),
		renderMs: Number(res.headers.get("X-Render-Ms") ?? "0"),
	};
}

export async function fetchDatasets(
	fetchImpl: FetchLike = fetch,
	baseUrl = "",
): Promise<DatasetEntry[]> {
	const res = await fetchImpl(`${baseUrl}/datasets`);
	if (!res.ok) throw new Error(`dataset listing failed: HTTP ${res.status}`);
	return (await res.json()) as DatasetEntry[];
}
