/** Side-by-side shading comparison helpers. */

import { buildRenderRequest, type RenderRequestBody } from "./api.js";
import type { ShadingMode, ViewerState } from "./state.js";

/** Two requests identical except for the shading mode. */
export function buildComparePair(
	state: ViewerState,
	modes: [ShadingMode, ShadingMode],
): [RenderRequestBody, RenderRequestBody] {
	return [buildRenderRequest(state, modes[0]), buildRenderRequest(state, modes[1])];
}

/**
 * Absolute per-channel pixel difference of two same-sized RGBA buffers,
 * amplified for visibility. Alpha is forced opaque in the output.
 */
export function diffPixels(
	a: Uint8ClampedArray,
	b: Uint8ClampedArray,
	gain = 4,
): { out: Uint8ClampedArray; maxAbs: number } {
	if (a.length !== b.length) throw new Error("pixel buffers differ in size");
	const out = new Uint8ClampedArray(a.length);
	let maxAbs = 0;
	for (let i = 0; i < a.length; i += 4) {
		for (let c = 0; c < 3; c++) {
			const d = Math.abs((a[i + c] ?? 0) - (b[i + c] ?? 0));
			if (d > maxAbs) maxAbs = d;
			out[i + c] = Math.min(255, d * gain);
		}
		out[i + 3] = 255;
	}
	return { out, maxAbs };
}
