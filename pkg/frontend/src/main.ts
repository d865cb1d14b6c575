/**
 * Browser entry point: mounts the three panels and binds DOM events.
 *
 * The server URL comes from a ?server= query parameter or the
 * AMIGO_SERVER global set in index.html, falling back to the page
 * origin, so the built bundle works from any static file server.
 */

import { ApiClient } from "./api";
import {
  Composer,
  DEFAULT_POLL_INTERVAL_MS,
  DetailPanel,
  FleetPanel,
  resolveServerUrl,
} from "./app";

function mount(): void {
  const fleetEl = document.getElementById("fleet");
  const detailEl = document.getElementById("detail");
  const composerEl = document.getElementById("composer");
  if (!fleetEl || !detailEl || !composerEl) {
    throw new Error("dashboard containers missing from index.html");
  }

  const serverUrl = resolveServerUrl(
    window as { AMIGO_SERVER?: string },
    window.location,
  );
  const api = new ApiClient(serverUrl);

  const fleet = new FleetPanel(api, DEFAULT_POLL_INTERVAL_MS, (html) => {
    fleetEl.innerHTML = html;
  });
  const detail = new DetailPanel(api, DEFAULT_POLL_INTERVAL_MS, (html) => {
    detailEl.innerHTML = html;
  });

  // The composer form holds its own input values between renders; only
  // structural changes (kind switch, validation flips, tracker moves)
  // rewrite the markup, so typing never loses focus.
  let composerSignature = "";
  const composer = new Composer(api, 2_000, () => {
    const tracker = composer.trackerState();
    const signature = JSON.stringify([
      composer.draft.kind,
      composer.problems(),
      composer.rejection,
      tracker.phase,
      tracker.instruction?.state,
      tracker.instruction?.outcome,
      tracker.hint,
    ]);
    if (signature !== composerSignature) {
      composerSignature = signature;
      composerEl.innerHTML = composer.html();
    }
  });
  composerEl.innerHTML = composer.html();

  fleetEl.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest("tr.device");
    const deviceId = row?.getAttribute("data-device-id");
    if (deviceId) {
      detail.select(deviceId);
      composer.setDevice(deviceId);
    }
  });

  composerEl.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.name === "device_id") {
      composer.setDevice(input.value);
    } else if (input.dataset["param"]) {
      composer.setParam(
        input.dataset["param"],
        input.value,
        input.dataset["type"] === "number" ? "number" : "text",
      );
    }
  });
  composerEl.addEventListener("change", (event) => {
    const select = event.target as HTMLSelectElement;
    if (select.name === "kind") {
      composer.setKind(select.value as typeof composer.draft.kind);
    }
  });
  composerEl.addEventListener("submit", (event) => {
    event.preventDefault();
    void composer.submit();
  });

  fleet.start();
}

mount();
