/* tslint:disable */
/* eslint-disable */

/**
 * A periodic tank started from `ζ = a cos x` over the shear `ω₂ = s(1+z)`.
 */
export class WaveTank {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Takes `steps` CFL-limited steps and returns the new time.
     */
    advance(steps: number): number;
    elevation(): Float64Array;
    /**
     * `(H − H₀)/H₀`, or `H − H₀` when the initial energy vanishes.
     */
    energy_drift(): number;
    constructor(eps: number, mu: number, amplitude: number, shear: number);
    /**
     * Horizontal velocity at the surface.
     */
    surface_velocity(): Float64Array;
    time(): number;
    /**
     * Grid abscissae in `[0, 2π)`.
     */
    x(): Float64Array;
}

/**
 * Angular frequency `(k tanh(√μ k)/√μ)^{1/2}` of a small standing wave.
 */
export function dispersion_frequency(mu: number, k: number): number;

/**
 * Sup-norm error of the reconstructed velocity for the closed-form
 * rotational flow over `ζ = 0.1 cos x` with `ε = 1`, `μ = 0.5`.
 */
export function reconstruction_error(nx: number, nz: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_wavetank_free: (a: number, b: number) => void;
    readonly dispersion_frequency: (a: number, b: number) => number;
    readonly reconstruction_error: (a: number, b: number) => [number, number, number];
    readonly wavetank_advance: (a: number, b: number) => [number, number, number];
    readonly wavetank_elevation: (a: number) => [number, number];
    readonly wavetank_energy_drift: (a: number) => number;
    readonly wavetank_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly wavetank_surface_velocity: (a: number) => [number, number];
    readonly wavetank_time: (a: number) => number;
    readonly wavetank_x: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
