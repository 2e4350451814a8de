// Error banner with a retry hook. API failures land here instead of being
// swallowed; the retry callback re-runs the exact action that failed.

export function showBanner(
  host: HTMLElement,
  message: string,
  onRetry?: () => void,
): void {
  clearBanner(host);
  const banner = document.createElement("div");
  banner.className = "banner";
  banner.setAttribute("role", "alert");
  const text = document.createElement("span");
  text.textContent = message;
  banner.appendChild(text);
  if (onRetry) {
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      clearBanner(host);
      onRetry();
    });
    banner.appendChild(retry);
  }
  const dismiss = document.createElement("button");
  dismiss.textContent = "Dismiss";
  dismiss.addEventListener("click", () => clearBanner(host));
  banner.appendChild(dismiss);
  host.prepend(banner);
}

export function clearBanner(host: HTMLElement): void {
  host.querySelectorAll(":scope > .banner").forEach((b) => b.remove());
}
